// Copyright 2026 The eegcare Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "eegcare/device/profile.hpp"

namespace eegcare::device {

inline constexpr std::uint8_t kFlagArtifact = 0x01;

// One notification worth of samples. `samples` is channel-major:
// samples[c * samples_per_packet + i].
struct SampleFrame {
  std::uint16_t sequence = 0;
  std::uint8_t flags = 0;
  std::vector<std::int32_t> samples;

  bool operator==(const SampleFrame&) const = default;
};

struct FrameLayout {
  int channels = 0;
  int samples_per_packet = 0;
  int resolution_bits = 24;

  static FrameLayout of(const PeripheralProfile& profile);
  static FrameLayout of(const DeviceConfig& config, const PeripheralProfile& profile);

  std::size_t sample_count() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(samples_per_packet);
  }
  std::size_t payload_bytes() const;
  std::size_t frame_bytes() const { return 3 + payload_bytes(); }
};

class FrameError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Wire layout: sequence (u16 LE) | flags (u8) | payload.
// 24-bit payload: 3 bytes LE two's complement per sample.
// 12-bit payload: samples offset by +2048 to unsigned, packed in pairs as
// b0 = s0 >> 4, b1 = (s0 & 0xF) << 4 | s1 >> 8, b2 = s1 & 0xFF; an odd tail
// sample is followed by a zero nibble and a zero byte.
std::vector<std::uint8_t> pack_frame(const SampleFrame& frame, const FrameLayout& layout);
std::vector<std::uint8_t> pack_frame(const SampleFrame& frame, const PeripheralProfile& profile);
SampleFrame unpack_frame(std::span<const std::uint8_t> bytes, const FrameLayout& layout);

// Raw 12-bit packing of unsigned values in [0, 4095].
std::vector<std::uint8_t> pack12(std::span<const std::uint16_t> values);
std::vector<std::uint16_t> unpack12(std::span<const std::uint8_t> bytes, std::size_t count);

}  // namespace eegcare::device
