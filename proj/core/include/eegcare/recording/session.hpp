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

// One patient recording: workflow state, received samples, gap log and
// quality events.
//
//   Idle -> Connected -> Mounted -> Recording <-> Reconnecting
//   Recording -> Finalizing -> Complete
//   any state except Complete and Aborted -> Aborted
//
// A single writer drives advance() and ingest_frame(); any number of readers
// may take snapshots concurrently.

#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegcare/device/frame.hpp"
#include "eegcare/device/gaps.hpp"
#include "eegcare/device/profile.hpp"
#include "eegcare/recording/view.hpp"

namespace eegcare::recording {

enum class SessionState { kIdle, kConnected, kMounted, kRecording, kReconnecting, kFinalizing, kComplete, kAborted };

enum class SessionEvent {
  kDeviceConnected,
  kPlacementVerified,
  kStartRecording,
  kTransportLost,
  kTransportRestored,
  kStopRecording,
  kFinalizeSucceeded,
  kAbort,
};

inline constexpr SessionEvent kAllSessionEvents[] = {
    SessionEvent::kDeviceConnected,   SessionEvent::kPlacementVerified, SessionEvent::kStartRecording,
    SessionEvent::kTransportLost,     SessionEvent::kTransportRestored, SessionEvent::kStopRecording,
    SessionEvent::kFinalizeSucceeded, SessionEvent::kAbort,
};

std::string_view to_string(SessionState s);
std::string_view to_string(SessionEvent e);

// The transition table. nullopt when the event is illegal in `from`.
std::optional<SessionState> transition(SessionState from, SessionEvent event);

class TransitionError : public std::logic_error {
 public:
  TransitionError(SessionState state, SessionEvent event);
  SessionState state;
  SessionEvent event;
};

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class QualityKind { kFlatline, kClipping, kOutOfRangeRms, kGap };
enum class Severity { kInfo, kWarn, kBad };

std::string_view to_string(QualityKind k);
std::string_view to_string(Severity s);

struct QualityEvent {
  int channel = -1;  // index into the active channels; -1 = all
  QualityKind kind = QualityKind::kGap;
  double onset = 0.0;     // s from recording start
  double duration = 0.0;  // s
  Severity severity = Severity::kInfo;

  bool operator==(const QualityEvent&) const = default;
};

struct GapEntry {
  double onset = 0.0;
  double duration = 0.0;
  std::uint64_t first_frame = 0;
  std::uint64_t frames = 0;

  bool operator==(const GapEntry&) const = default;
};

struct QualityThresholds {
  double flatline_peak_to_peak = 1.0;  // digital units per 1-s window
  int clipping_run = 32;               // consecutive rail samples
  double rms_min = 0.5;                // physical units, mean removed
  double rms_max = 300.0;
};

struct SessionOptions {
  QualityThresholds thresholds;
  // Buffer capacity, in seconds at the profile's maximum rate.
  double buffer_seconds = 600.0;
};

struct SessionSummary {
  std::string session_id;
  std::string patient_ref;
  SessionState state = SessionState::kIdle;
  std::uint64_t frames_received = 0;
  std::uint64_t frames_missing = 0;
  std::uint64_t samples_per_channel = 0;  // received samples
  double elapsed = 0.0;                   // s of stream timeline covered
  std::optional<std::string> abort_reason;
};

class RecordingSession {
 public:
  using SystemTime = std::chrono::system_clock::time_point;

  RecordingSession(std::string session_id, std::string patient_ref, device::PeripheralProfile profile,
                   device::DeviceConfig config, SessionOptions options = {});

  // Throws TransitionError without changing state when illegal.
  SessionState advance(SessionEvent event);
  SessionState abort(std::string reason);

  // Requires state Recording. Returns newly detected events, one per 1-s
  // window or finished clipping run; the stored log merges adjacent spans.
  // Throws SessionError for a frame of the wrong shape; overflowing the
  // buffer aborts the session and throws SessionError.
  std::vector<QualityEvent> ingest_frame(const device::SampleFrame& frame);

  // Records frames the device sent after the last one received, and flushes
  // pending detector state.
  std::vector<QualityEvent> note_stream_end(std::uint64_t frames_sent);

  // Snapshot accessors.
  SessionState state() const;
  SessionSummary summary() const;
  std::vector<GapEntry> gaps() const;
  std::vector<QualityEvent> quality_events() const;
  std::optional<SystemTime> started_at() const;
  std::optional<std::string> abort_reason() const;
  // Received samples of active channel c, digital.
  std::vector<std::int32_t> channel_samples(std::size_t c) const;
  // Stream frame index of every received frame, ascending.
  std::vector<std::uint64_t> frame_indices() const;
  // Total frames the stream timeline spans (received + missing).
  std::uint64_t timeline_frames() const;
  // Last `window_s` seconds of received samples, decimated to n points.
  ViewFrame view(double window_s, std::size_t n) const;

  const std::string& session_id() const { return session_id_; }
  const std::string& patient_ref() const { return patient_ref_; }
  const device::PeripheralProfile& profile() const { return profile_; }
  const device::DeviceConfig& config() const { return config_; }
  const SessionOptions& options() const { return options_; }
  std::size_t capacity_samples() const { return capacity_; }

 private:
  struct ChannelDetector {
    std::int64_t window = -1;
    std::uint64_t first = 0, last = 0;
    std::int32_t min = 0, max = 0;
    double sum = 0.0, sumsq = 0.0;
    std::uint64_t count = 0;
    std::uint64_t run_start = 0, run_len = 0;
  };

  SessionState advance_locked(SessionEvent event);
  void add_gap_locked(std::uint64_t first_frame, std::uint64_t frames, std::vector<QualityEvent>& out);
  void record_event_locked(const QualityEvent& e, std::vector<QualityEvent>& out);
  void close_window_locked(std::size_t c, std::vector<QualityEvent>& out);
  void end_run_locked(std::size_t c, std::vector<QualityEvent>& out);
  void feed_locked(std::size_t c, std::uint64_t t, std::int32_t v, std::vector<QualityEvent>& out);
  void flush_locked(std::vector<QualityEvent>& out);

  std::string session_id_;
  std::string patient_ref_;
  device::PeripheralProfile profile_;
  device::DeviceConfig config_;
  SessionOptions options_;
  device::FrameLayout layout_;
  codec::Calibration calibration_;
  std::size_t capacity_ = 0;

  // Plain mutex: readers only copy under it, and a reader-preferring
  // rwlock can starve the ingestion writer.
  mutable std::mutex mu_;
  SessionState state_ = SessionState::kIdle;
  std::optional<SystemTime> started_at_;
  std::optional<std::string> abort_reason_;
  device::SequenceTracker tracker_;
  std::uint64_t stream_end_frames_ = 0;
  std::vector<std::vector<std::int32_t>> samples_;
  std::vector<std::uint64_t> frame_index_;
  std::vector<GapEntry> gaps_;
  std::vector<QualityEvent> events_;
  std::vector<ChannelDetector> detectors_;
  bool detectors_flushed_ = false;
};

nlohmann::json to_json(const QualityEvent& e, const std::vector<std::string>& labels);
nlohmann::json to_json(const GapEntry& g);
nlohmann::json to_json(const SessionSummary& s);

}  // namespace eegcare::recording
