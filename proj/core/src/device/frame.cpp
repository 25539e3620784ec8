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

#include "eegcare/device/frame.hpp"

#include <string>

namespace eegcare::device {

namespace {

constexpr std::int32_t k12BitOffset = 2048;

void check_layout(const FrameLayout& layout) {
  if (layout.channels < 1 || layout.samples_per_packet < 1) {
    throw FrameError("frame layout needs at least one channel and one sample");
  }
  if (layout.resolution_bits != 12 && layout.resolution_bits != 24) {
    throw FrameError("unsupported resolution " + std::to_string(layout.resolution_bits));
  }
}

}  // namespace

FrameLayout FrameLayout::of(const PeripheralProfile& profile) {
  return {profile.channel_count, profile.samples_per_packet, profile.resolution_bits};
}

FrameLayout FrameLayout::of(const DeviceConfig& config, const PeripheralProfile& profile) {
  return {static_cast<int>(config.active_channels.size()),
          config.samples_per_packet > 0 ? config.samples_per_packet : profile.samples_per_packet,
          profile.resolution_bits};
}

std::size_t FrameLayout::payload_bytes() const {
  if (resolution_bits == 12) return (sample_count() + 1) / 2 * 3;
  return sample_count() * 3;
}

std::vector<std::uint8_t> pack12(std::span<const std::uint16_t> values) {
  std::vector<std::uint8_t> out;
  out.reserve((values.size() + 1) / 2 * 3);
  for (std::size_t i = 0; i < values.size(); i += 2) {
    const std::uint16_t s0 = values[i];
    const std::uint16_t s1 = i + 1 < values.size() ? values[i + 1] : 0;
    if (s0 > 0x0FFF || s1 > 0x0FFF) throw FrameError("12-bit value out of range");
    out.push_back(static_cast<std::uint8_t>(s0 >> 4));
    out.push_back(static_cast<std::uint8_t>(((s0 & 0x0F) << 4) | (s1 >> 8)));
    out.push_back(static_cast<std::uint8_t>(s1 & 0xFF));
  }
  return out;
}

std::vector<std::uint16_t> unpack12(std::span<const std::uint8_t> bytes, std::size_t count) {
  if (bytes.size() != (count + 1) / 2 * 3) throw FrameError("12-bit payload length mismatch");
  std::vector<std::uint16_t> out;
  out.reserve(count + 1);
  for (std::size_t i = 0; i + 2 < bytes.size(); i += 3) {
    out.push_back(static_cast<std::uint16_t>((bytes[i] << 4) | (bytes[i + 1] >> 4)));
    out.push_back(static_cast<std::uint16_t>(((bytes[i + 1] & 0x0F) << 8) | bytes[i + 2]));
  }
  out.resize(count);
  return out;
}

std::vector<std::uint8_t> pack_frame(const SampleFrame& frame, const FrameLayout& layout) {
  check_layout(layout);
  if (frame.samples.size() != layout.sample_count()) {
    throw FrameError("frame holds " + std::to_string(frame.samples.size()) + " samples, layout expects " +
                     std::to_string(layout.sample_count()));
  }
  const std::int32_t lo = -(std::int32_t{1} << (layout.resolution_bits - 1));
  const std::int32_t hi = (std::int32_t{1} << (layout.resolution_bits - 1)) - 1;
  for (std::int32_t s : frame.samples) {
    if (s < lo || s > hi) {
      throw FrameError("sample " + std::to_string(s) + " outside " +
                       std::to_string(layout.resolution_bits) + "-bit range");
    }
  }

  std::vector<std::uint8_t> out;
  out.reserve(layout.frame_bytes());
  out.push_back(static_cast<std::uint8_t>(frame.sequence & 0xFF));
  out.push_back(static_cast<std::uint8_t>(frame.sequence >> 8));
  out.push_back(frame.flags);
  if (layout.resolution_bits == 12) {
    std::vector<std::uint16_t> wire(frame.samples.size());
    for (std::size_t i = 0; i < wire.size(); ++i) {
      wire[i] = static_cast<std::uint16_t>(frame.samples[i] + k12BitOffset);
    }
    const auto payload = pack12(wire);
    out.insert(out.end(), payload.begin(), payload.end());
  } else {
    for (std::int32_t s : frame.samples) {
      const auto u = static_cast<std::uint32_t>(s);
      out.push_back(static_cast<std::uint8_t>(u & 0xFF));
      out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
      out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
    }
  }
  return out;
}

std::vector<std::uint8_t> pack_frame(const SampleFrame& frame, const PeripheralProfile& profile) {
  return pack_frame(frame, FrameLayout::of(profile));
}

SampleFrame unpack_frame(std::span<const std::uint8_t> bytes, const FrameLayout& layout) {
  check_layout(layout);
  if (bytes.size() != layout.frame_bytes()) {
    throw FrameError("frame is " + std::to_string(bytes.size()) + " bytes, layout expects " +
                     std::to_string(layout.frame_bytes()));
  }
  SampleFrame f;
  f.sequence = static_cast<std::uint16_t>(bytes[0] | (bytes[1] << 8));
  f.flags = bytes[2];
  const auto payload = bytes.subspan(3);
  const std::size_t n = layout.sample_count();
  f.samples.resize(n);
  if (layout.resolution_bits == 12) {
    const auto wire = unpack12(payload, n);
    if (n % 2 == 1 && ((payload[payload.size() - 2] & 0x0F) != 0 || payload.back() != 0)) {
      throw FrameError("non-zero padding nibble in 12-bit payload");
    }
    for (std::size_t i = 0; i < n; ++i) f.samples[i] = static_cast<std::int32_t>(wire[i]) - k12BitOffset;
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t u = payload[3 * i] | (payload[3 * i + 1] << 8) | (static_cast<std::uint32_t>(payload[3 * i + 2]) << 16);
      if (u & 0x800000u) u |= 0xFF000000u;
      f.samples[i] = static_cast<std::int32_t>(u);
    }
  }
  return f;
}

}  // namespace eegcare::device
