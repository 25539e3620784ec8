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

// Drives a RecordingSession from a device connection. Device I/O runs on
// one thread and hands frames over a queue to the ingestion thread, which is
// the session's only writer.

#pragma once

#include <atomic>
#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "eegcare/net/socket.hpp"
#include "eegcare/recording/session.hpp"
#include "eegcare/sim/client.hpp"

namespace eegcare::recording {

struct RecorderOptions {
  std::uint32_t duration_ms = 0;  // 0 = until stop()
  std::optional<device::DeviceConfig> requested;
  SessionOptions session;
  std::chrono::milliseconds connect_timeout{2000};
  std::chrono::milliseconds reconnect_timeout{10000};
  // Silence while streaming longer than this counts as a lost transport.
  std::chrono::milliseconds stall_timeout{5000};
  std::function<void(const QualityEvent&)> on_quality;
  std::function<void(SessionState)> on_state;
};

struct RecordingResult {
  SessionState state = SessionState::kIdle;
  std::optional<sim::StreamSummary> stream;
  int reconnects = 0;
  std::optional<std::string> error;
};

class Recorder {
 public:
  Recorder(net::Endpoint endpoint, std::string session_id, std::string patient_ref,
           RecorderOptions options = {});
  ~Recorder();
  Recorder(const Recorder&) = delete;
  Recorder& operator=(const Recorder&) = delete;

  // Discovers and configures the device. The session is then Connected.
  // Throws net::TransportError or sim::DeviceError.
  std::shared_ptr<RecordingSession> connect();
  // Operator confirmation that the headset sits correctly.
  void confirm_placement();
  // Starts streaming and the worker threads. Requires state Mounted.
  void start();
  // Asks the device to end the stream; wait() returns after STREAM_END.
  void stop();
  // Gives up immediately; the session is aborted.
  void abort(const std::string& reason);
  RecordingResult wait();

  std::shared_ptr<RecordingSession> session() const { return session_; }

 private:
  struct Item;
  class Queue;
  void read_loop();
  void ingest_loop();
  void notify_state();

  net::Endpoint endpoint_;
  std::string session_id_;
  std::string patient_ref_;
  RecorderOptions options_;
  sim::DeviceClient client_;
  std::shared_ptr<RecordingSession> session_;
  std::unique_ptr<Queue> queue_;
  std::thread reader_;
  std::thread ingester_;
  std::atomic<bool> stop_requested_{false};
  std::atomic<bool> abort_requested_{false};
  RecordingResult result_;
};

}  // namespace eegcare::recording
