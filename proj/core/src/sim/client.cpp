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

#include "eegcare/sim/client.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace eegcare::sim {

using Clock = std::chrono::steady_clock;

void DeviceClient::connect(Millis timeout) {
  auto s = net::connect_with_retry(endpoint_, timeout);
  std::lock_guard lock(socket_mu_);
  socket_ = std::move(s);
  backlog_.clear();
}

void DeviceClient::close() {
  std::lock_guard lock(socket_mu_);
  socket_.close();
  backlog_.clear();
}

void DeviceClient::interrupt() {
  std::lock_guard lock(socket_mu_);
  socket_.shutdown();
}

Message DeviceClient::await(Opcode opcode, Millis timeout) {
  const auto deadline = Clock::now() + timeout;
  while (true) {
    const auto left = std::chrono::duration_cast<Millis>(deadline - Clock::now());
    if (left.count() <= 0) throw DeviceError("timed out waiting for device reply");
    auto bytes = socket_.recv_message(left);
    if (!bytes) continue;
    auto m = decode_message(*bytes);
    if (m.opcode == opcode) return m;
    if (m.opcode == Opcode::kError) {
      throw DeviceError("device error: " + std::string(m.body.begin(), m.body.end()));
    }
    backlog_.push_back(std::move(m));  // data interleaved with the reply
  }
}

const device::PeripheralProfile& DeviceClient::discover(Millis timeout) {
  socket_.send_message(encode_message(Opcode::kDiscover));
  const auto m = await(Opcode::kServiceTree, timeout);
  try {
    profile_ = device::profile_from_json(nlohmann::json::parse(m.body.begin(), m.body.end()));
  } catch (const std::exception& e) {
    throw DeviceError(std::string("bad service tree: ") + e.what());
  }
  if (!config_) config_ = device::default_config(*profile_);
  return *profile_;
}

const device::DeviceConfig& DeviceClient::configure(const device::DeviceConfig& requested, Millis timeout) {
  if (!profile_) discover(timeout);
  // Labels the device does not have cannot be expressed in the channel mask.
  auto req = requested;
  std::erase_if(req.active_channels, [&](const std::string& label) {
    const auto& labels = profile_->electrode_labels;
    return std::find(labels.begin(), labels.end(), label) == labels.end();
  });
  if (req.active_channels.empty() && !requested.active_channels.empty()) {
    throw DeviceError("no requested channel is available on " + profile_->name);
  }
  socket_.send_message(encode_message(Opcode::kConfigure, encode_config(req, *profile_)));
  const auto m = await(Opcode::kConfigAck, timeout);
  config_ = decode_config(m.body, *profile_);
  return *config_;
}

void DeviceClient::start(std::uint32_t duration_ms) {
  if (!profile_) throw DeviceError("start before discovery");
  socket_.send_message(encode_message(Opcode::kStart, encode_start(duration_ms)));
}

void DeviceClient::stop() { socket_.send_message(encode_message(Opcode::kStop)); }

ClientEvent DeviceClient::to_event(const Message& m) {
  ClientEvent ev;
  switch (m.opcode) {
    case Opcode::kData:
      if (!profile_ || !config_) throw DeviceError("data before configuration");
      ev.kind = ClientEvent::Kind::kFrame;
      ev.frame = device::unpack_frame(m.body, device::FrameLayout::of(*config_, *profile_));
      break;
    case Opcode::kStreamEnd:
      ev.kind = ClientEvent::Kind::kStreamEnd;
      ev.summary = decode_stream_end(m.body);
      break;
    case Opcode::kError:
      ev.kind = ClientEvent::Kind::kError;
      ev.message.assign(m.body.begin(), m.body.end());
      break;
    default:
      ev.kind = ClientEvent::Kind::kError;
      ev.message = "unexpected opcode " + std::to_string(static_cast<int>(m.opcode));
  }
  return ev;
}

ClientEvent DeviceClient::next(Millis timeout) {
  if (!backlog_.empty()) {
    auto m = std::move(backlog_.front());
    backlog_.pop_front();
    return to_event(m);
  }
  if (!socket_.valid()) return {ClientEvent::Kind::kClosed, {}, {}, "not connected"};
  try {
    auto bytes = socket_.recv_message(timeout);
    if (!bytes) return {};
    return to_event(decode_message(*bytes));
  } catch (const net::TransportError& e) {
    close();
    return {ClientEvent::Kind::kClosed, {}, {}, e.what()};
  }
}

}  // namespace eegcare::sim
