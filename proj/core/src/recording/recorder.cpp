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

#include "eegcare/recording/recorder.hpp"

#include <condition_variable>
#include <deque>
#include <mutex>

namespace eegcare::recording {

using Clock = std::chrono::steady_clock;

struct Recorder::Item {
  enum class Kind { kFrame, kLost, kRestored, kEnd, kFail };
  Kind kind;
  device::SampleFrame frame;
  sim::StreamSummary summary;
  std::string message;
};

class Recorder::Queue {
 public:
  void push(Item item) {
    {
      std::lock_guard lock(mu_);
      items_.push_back(std::move(item));
    }
    cv_.notify_one();
  }
  Item pop() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !items_.empty(); });
    Item item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Item> items_;
};

Recorder::Recorder(net::Endpoint endpoint, std::string session_id, std::string patient_ref,
                   RecorderOptions options)
    : endpoint_(endpoint),
      session_id_(std::move(session_id)),
      patient_ref_(std::move(patient_ref)),
      options_(std::move(options)),
      client_(std::move(endpoint)),
      queue_(std::make_unique<Queue>()) {}

Recorder::~Recorder() {
  if (reader_.joinable() || ingester_.joinable()) {
    abort("recorder destroyed");
    wait();
  }
}

void Recorder::notify_state() {
  if (options_.on_state && session_) options_.on_state(session_->state());
}

std::shared_ptr<RecordingSession> Recorder::connect() {
  client_.connect(options_.connect_timeout);
  const auto profile = client_.discover();
  auto requested = options_.requested.value_or(device::DeviceConfig{});
  const auto config = client_.configure(requested);
  session_ = std::make_shared<RecordingSession>(session_id_, patient_ref_, profile, config, options_.session);
  session_->advance(SessionEvent::kDeviceConnected);
  notify_state();
  return session_;
}

void Recorder::confirm_placement() {
  if (!session_) throw SessionError("not connected");
  session_->advance(SessionEvent::kPlacementVerified);
  notify_state();
}

void Recorder::start() {
  if (!session_) throw SessionError("not connected");
  session_->advance(SessionEvent::kStartRecording);
  notify_state();
  client_.start(options_.duration_ms);
  reader_ = std::thread([this] { read_loop(); });
  ingester_ = std::thread([this] { ingest_loop(); });
}

void Recorder::stop() { stop_requested_ = true; }

void Recorder::abort(const std::string& reason) {
  if (!abort_requested_.exchange(true)) {
    queue_->push({Item::Kind::kFail, {}, {}, reason});
  }
  client_.interrupt();
}

void Recorder::read_loop() {
  bool stop_sent = false;
  auto last_message = Clock::now();
  while (!abort_requested_) {
    if (stop_requested_ && !stop_sent && client_.connected()) {
      try {
        client_.stop();
        stop_sent = true;
      } catch (const net::TransportError&) {
      }
    }
    auto ev = client_.next(std::chrono::milliseconds(100));
    if (ev.kind == sim::ClientEvent::Kind::kTimeout) {
      if (Clock::now() - last_message < options_.stall_timeout) continue;
      client_.close();
      ev.kind = sim::ClientEvent::Kind::kClosed;
    }
    last_message = Clock::now();
    switch (ev.kind) {
      case sim::ClientEvent::Kind::kFrame:
        queue_->push({Item::Kind::kFrame, std::move(ev.frame), {}, {}});
        break;
      case sim::ClientEvent::Kind::kStreamEnd:
        queue_->push({Item::Kind::kEnd, {}, ev.summary, {}});
        return;
      case sim::ClientEvent::Kind::kError:
        queue_->push({Item::Kind::kFail, {}, {}, "device error: " + ev.message});
        return;
      case sim::ClientEvent::Kind::kClosed: {
        if (abort_requested_) return;
        queue_->push({Item::Kind::kLost, {}, {}, ev.message});
        try {
          client_.connect(options_.reconnect_timeout);
          client_.discover();
        } catch (const std::exception& e) {
          queue_->push({Item::Kind::kFail, {}, {}, std::string("device unreachable: ") + e.what()});
          return;
        }
        stop_sent = false;
        last_message = Clock::now();
        queue_->push({Item::Kind::kRestored, {}, {}, {}});
        break;
      }
      case sim::ClientEvent::Kind::kTimeout:
        break;
    }
  }
}

void Recorder::ingest_loop() {
  while (true) {
    Item item = queue_->pop();
    try {
      switch (item.kind) {
        case Item::Kind::kFrame: {
          if (session_->state() != SessionState::kRecording) break;
          for (const auto& e : session_->ingest_frame(item.frame)) {
            if (options_.on_quality) options_.on_quality(e);
          }
          break;
        }
        case Item::Kind::kLost:
          session_->advance(SessionEvent::kTransportLost);
          notify_state();
          break;
        case Item::Kind::kRestored:
          session_->advance(SessionEvent::kTransportRestored);
          ++result_.reconnects;
          notify_state();
          break;
        case Item::Kind::kEnd:
          result_.stream = item.summary;
          for (const auto& e : session_->note_stream_end(item.summary.frames_sent)) {
            if (options_.on_quality) options_.on_quality(e);
          }
          session_->advance(SessionEvent::kStopRecording);
          notify_state();
          return;
        case Item::Kind::kFail:
          result_.error = item.message;
          if (transition(session_->state(), SessionEvent::kAbort)) session_->abort(item.message);
          notify_state();
          abort_requested_ = true;
          client_.interrupt();
          return;
      }
    } catch (const std::exception& e) {
      result_.error = e.what();
      if (transition(session_->state(), SessionEvent::kAbort)) session_->abort(e.what());
      notify_state();
      abort_requested_ = true;
      client_.interrupt();
      return;
    }
  }
}

RecordingResult Recorder::wait() {
  if (ingester_.joinable()) ingester_.join();
  if (reader_.joinable()) reader_.join();
  client_.close();
  result_.state = session_ ? session_->state() : SessionState::kIdle;
  return result_;
}

}  // namespace eegcare::recording
