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

// Control and data messages exchanged with a device. Each transport message
// is one opcode byte followed by an opcode-specific body. See
// docs/wire-protocol.md for the byte layouts.

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "eegcare/device/profile.hpp"

namespace eegcare::sim {

using Bytes = std::vector<std::uint8_t>;

enum class Opcode : std::uint8_t {
  kDiscover = 0x01,
  kConfigure = 0x02,
  kStart = 0x03,
  kStop = 0x04,
  kServiceTree = 0x81,
  kConfigAck = 0x82,
  kData = 0x83,
  kStreamEnd = 0x84,
  kError = 0x85,
};

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Message {
  Opcode opcode = Opcode::kError;
  Bytes body;
};

Bytes encode_message(Opcode opcode, std::span<const std::uint8_t> body = {});
Bytes encode_message(Opcode opcode, const std::string& text);
Message decode_message(std::span<const std::uint8_t> bytes);

// CONFIGURE / CONFIG_ACK body:
//   rate u32 | resolution_bits u8 | samples_per_packet u16 | channel mask u32
// Bit i of the mask selects the profile's i-th electrode. In a request, rate 0
// keeps the current rate and mask 0 selects every channel.
Bytes encode_config(const device::DeviceConfig& config, const device::PeripheralProfile& profile);
device::DeviceConfig decode_config(std::span<const std::uint8_t> body,
                                   const device::PeripheralProfile& profile);

// START body: duration_ms u32 (0 = until STOP).
Bytes encode_start(std::uint32_t duration_ms);
std::uint32_t decode_start(std::span<const std::uint8_t> body);

// STREAM_END body: sent u32 | dropped u32 | lost u32.
struct StreamSummary {
  std::uint32_t frames_sent = 0;
  std::uint32_t frames_dropped = 0;
  std::uint32_t frames_lost = 0;

  bool operator==(const StreamSummary&) const = default;
};

Bytes encode_stream_end(const StreamSummary& summary);
StreamSummary decode_stream_end(std::span<const std::uint8_t> body);

}  // namespace eegcare::sim
