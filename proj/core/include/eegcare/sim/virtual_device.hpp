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

// A software EEG peripheral serving one client over the framed transport.
//
// Frame k carries samples [k * spp, (k + 1) * spp) and has stream time
// k * spp / rate. A stream of duration d sends ceil(d * rate / spp) frames.
// Frames whose time falls in an outage window are never sent but still
// consume sequence numbers.

#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "eegcare/device/frame.hpp"
#include "eegcare/device/profile.hpp"
#include "eegcare/net/socket.hpp"
#include "eegcare/sim/faults.hpp"
#include "eegcare/sim/signal.hpp"

namespace eegcare::sim {

enum class Pacing {
  kRealtime,  // frames leave at the configured sample rate
  kFast,      // as fast as the client reads; outages are instantaneous
};

struct DeviceOptions {
  net::Endpoint endpoint;  // port 0 binds an ephemeral port
  Pacing pacing = Pacing::kRealtime;
  // Requested start-up configuration, negotiated against the profile.
  std::optional<device::DeviceConfig> config;
  // Streaming with no client connected ends the stream after this long.
  double idle_timeout_s = 10.0;
  // After STREAM_END, wait this long for the client to hang up.
  double linger_s = 2.0;
};

struct DeviceReport {
  std::uint64_t frames_sent = 0;  // sequence numbers consumed
  std::uint64_t frames_delivered = 0;
  std::uint64_t frames_dropped = 0;
  std::uint64_t frames_lost = 0;  // outage windows, or no client attached
  std::uint32_t connections = 0;
  std::uint32_t outages = 0;
  device::DeviceConfig config;
  bool streamed = false;
  std::optional<std::string> error;
};

// Stream frame `index` as the device would emit it before faults.
device::SampleFrame make_frame(const SignalSpec& spec, const device::DeviceConfig& config,
                               const device::PeripheralProfile& profile, std::uint64_t index);

std::uint64_t frames_for_duration(std::uint64_t duration_ms, const device::DeviceConfig& config);

class VirtualDevice {
 public:
  // Throws ProfileError, SignalError or FaultError on invalid input.
  VirtualDevice(device::PeripheralProfile profile, SignalSpec signal, FaultModel faults,
                DeviceOptions options = {});
  ~VirtualDevice();
  VirtualDevice(const VirtualDevice&) = delete;
  VirtualDevice& operator=(const VirtualDevice&) = delete;

  // Binds the endpoint and starts serving. Throws net::TransportError when
  // the endpoint is busy.
  void start();
  void stop();

  // Blocks until serving ends.
  DeviceReport wait();
  bool wait_for(std::chrono::milliseconds timeout);
  bool finished() const;

  DeviceReport report() const;
  net::Endpoint endpoint() const;
  const device::PeripheralProfile& profile() const;
  // Start-up configuration after negotiation.
  const device::DeviceConfig& initial_config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::unique_ptr<VirtualDevice> run_virtual_device(device::PeripheralProfile profile, SignalSpec signal,
                                                  FaultModel faults, DeviceOptions options = {});

}  // namespace eegcare::sim
