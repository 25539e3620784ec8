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

#include <chrono>
#include <deque>
#include <mutex>
#include <optional>
#include <string>

#include "eegcare/device/frame.hpp"
#include "eegcare/device/profile.hpp"
#include "eegcare/net/socket.hpp"
#include "eegcare/sim/protocol.hpp"

namespace eegcare::sim {

struct ClientEvent {
  enum class Kind { kFrame, kStreamEnd, kError, kClosed, kTimeout };
  Kind kind = Kind::kTimeout;
  device::SampleFrame frame;
  StreamSummary summary;
  std::string message;
};

class DeviceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Host side of the device protocol. Not thread-safe, except interrupt().
class DeviceClient {
 public:
  using Millis = std::chrono::milliseconds;

  explicit DeviceClient(net::Endpoint endpoint) : endpoint_(std::move(endpoint)) {}

  // Retries refused connections until `timeout`. Throws net::TransportError.
  void connect(Millis timeout = Millis(2000));
  bool connected() const { return socket_.valid(); }
  void close();
  // Unblocks a pending next() from another thread.
  void interrupt();

  // Each throws DeviceError on an ERROR reply or timeout, and
  // net::TransportError when the link fails.
  const device::PeripheralProfile& discover(Millis timeout = Millis(5000));
  const device::DeviceConfig& configure(const device::DeviceConfig& requested,
                                        Millis timeout = Millis(5000));
  void start(std::uint32_t duration_ms);
  void stop();

  ClientEvent next(Millis timeout);

  const std::optional<device::PeripheralProfile>& profile() const { return profile_; }
  const std::optional<device::DeviceConfig>& config() const { return config_; }
  const net::Endpoint& endpoint() const { return endpoint_; }

 private:
  Message await(Opcode opcode, Millis timeout);
  ClientEvent to_event(const Message& m);

  net::Endpoint endpoint_;
  std::mutex socket_mu_;  // guards reassignment against interrupt()
  net::Socket socket_;
  std::optional<device::PeripheralProfile> profile_;
  std::optional<device::DeviceConfig> config_;
  std::deque<Message> backlog_;
};

}  // namespace eegcare::sim
