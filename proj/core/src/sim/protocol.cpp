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

#include "eegcare/sim/protocol.hpp"

#include <algorithm>

namespace eegcare::sim {

namespace {

void put_u16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}

std::uint16_t get_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + i];
  return v;
}

void expect_size(std::span<const std::uint8_t> body, std::size_t n, const char* what) {
  if (body.size() != n) {
    throw ProtocolError(std::string(what) + " body must be " + std::to_string(n) + " bytes, got " +
                        std::to_string(body.size()));
  }
}

bool known_opcode(std::uint8_t op) {
  return (op >= 0x01 && op <= 0x04) || (op >= 0x81 && op <= 0x85);
}

}  // namespace

Bytes encode_message(Opcode opcode, std::span<const std::uint8_t> body) {
  Bytes out;
  out.reserve(1 + body.size());
  out.push_back(static_cast<std::uint8_t>(opcode));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

Bytes encode_message(Opcode opcode, const std::string& text) {
  return encode_message(opcode, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Message decode_message(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw ProtocolError("empty message");
  if (!known_opcode(bytes[0])) throw ProtocolError("unknown opcode " + std::to_string(bytes[0]));
  return {static_cast<Opcode>(bytes[0]), Bytes(bytes.begin() + 1, bytes.end())};
}

Bytes encode_config(const device::DeviceConfig& config, const device::PeripheralProfile& profile) {
  std::uint32_t mask = 0;
  for (const auto& label : config.active_channels) {
    const auto it = std::find(profile.electrode_labels.begin(), profile.electrode_labels.end(), label);
    if (it == profile.electrode_labels.end()) throw ProtocolError("unknown channel '" + label + "'");
    mask |= 1u << (it - profile.electrode_labels.begin());
  }
  Bytes out;
  put_u32(out, static_cast<std::uint32_t>(config.rate));
  out.push_back(static_cast<std::uint8_t>(config.resolution_bits));
  put_u16(out, static_cast<std::uint16_t>(config.samples_per_packet));
  put_u32(out, mask);
  return out;
}

device::DeviceConfig decode_config(std::span<const std::uint8_t> body,
                                   const device::PeripheralProfile& profile) {
  expect_size(body, 11, "configuration");
  device::DeviceConfig c;
  c.rate = static_cast<int>(get_u32(body, 0));
  c.resolution_bits = body[4];
  c.samples_per_packet = get_u16(body, 5);
  const std::uint32_t mask = get_u32(body, 7);
  for (std::size_t i = 0; i < 32; ++i) {
    if ((mask >> i) & 1u) {
      if (i >= profile.electrode_labels.size()) throw ProtocolError("channel mask selects unknown channel");
      c.active_channels.push_back(profile.electrode_labels[i]);
    }
  }
  return c;
}

Bytes encode_start(std::uint32_t duration_ms) {
  Bytes out;
  put_u32(out, duration_ms);
  return out;
}

std::uint32_t decode_start(std::span<const std::uint8_t> body) {
  expect_size(body, 4, "start");
  return get_u32(body, 0);
}

Bytes encode_stream_end(const StreamSummary& s) {
  Bytes out;
  put_u32(out, s.frames_sent);
  put_u32(out, s.frames_dropped);
  put_u32(out, s.frames_lost);
  return out;
}

StreamSummary decode_stream_end(std::span<const std::uint8_t> body) {
  expect_size(body, 12, "stream end");
  return {get_u32(body, 0), get_u32(body, 4), get_u32(body, 8)};
}

}  // namespace eegcare::sim
