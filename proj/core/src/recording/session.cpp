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

#include "eegcare/recording/session.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

namespace eegcare::recording {

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::kIdle:
      return "Idle";
    case SessionState::kConnected:
      return "Connected";
    case SessionState::kMounted:
      return "Mounted";
    case SessionState::kRecording:
      return "Recording";
    case SessionState::kReconnecting:
      return "Reconnecting";
    case SessionState::kFinalizing:
      return "Finalizing";
    case SessionState::kComplete:
      return "Complete";
    case SessionState::kAborted:
      return "Aborted";
  }
  return "?";
}

std::string_view to_string(SessionEvent e) {
  switch (e) {
    case SessionEvent::kDeviceConnected:
      return "device-connected";
    case SessionEvent::kPlacementVerified:
      return "placement-verified";
    case SessionEvent::kStartRecording:
      return "start-recording";
    case SessionEvent::kTransportLost:
      return "transport-lost";
    case SessionEvent::kTransportRestored:
      return "transport-restored";
    case SessionEvent::kStopRecording:
      return "stop-recording";
    case SessionEvent::kFinalizeSucceeded:
      return "finalize-succeeded";
    case SessionEvent::kAbort:
      return "abort";
  }
  return "?";
}

std::string_view to_string(QualityKind k) {
  switch (k) {
    case QualityKind::kFlatline:
      return "flatline";
    case QualityKind::kClipping:
      return "clipping";
    case QualityKind::kOutOfRangeRms:
      return "out-of-range-rms";
    case QualityKind::kGap:
      return "gap";
  }
  return "?";
}

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::kInfo:
      return "info";
    case Severity::kWarn:
      return "warn";
    case Severity::kBad:
      return "bad";
  }
  return "?";
}

std::optional<SessionState> transition(SessionState from, SessionEvent event) {
  using S = SessionState;
  using E = SessionEvent;
  if (event == E::kAbort) {
    if (from == S::kComplete || from == S::kAborted) return std::nullopt;
    return S::kAborted;
  }
  switch (from) {
    case S::kIdle:
      if (event == E::kDeviceConnected) return S::kConnected;
      break;
    case S::kConnected:
      if (event == E::kPlacementVerified) return S::kMounted;
      break;
    case S::kMounted:
      if (event == E::kStartRecording) return S::kRecording;
      break;
    case S::kRecording:
      if (event == E::kTransportLost) return S::kReconnecting;
      if (event == E::kStopRecording) return S::kFinalizing;
      break;
    case S::kReconnecting:
      if (event == E::kTransportRestored) return S::kRecording;
      break;
    case S::kFinalizing:
      if (event == E::kFinalizeSucceeded) return S::kComplete;
      break;
    case S::kComplete:
    case S::kAborted:
      break;
  }
  return std::nullopt;
}

TransitionError::TransitionError(SessionState s, SessionEvent e)
    : std::logic_error("event " + std::string(to_string(e)) + " is not allowed in state " +
                       std::string(to_string(s))),
      state(s),
      event(e) {}

RecordingSession::RecordingSession(std::string session_id, std::string patient_ref,
                                   device::PeripheralProfile profile, device::DeviceConfig config,
                                   SessionOptions options)
    : session_id_(std::move(session_id)),
      patient_ref_(std::move(patient_ref)),
      profile_(std::move(profile)),
      config_(std::move(config)),
      options_(options) {
  device::check_profile(profile_);
  if (config_.samples_per_packet == 0) config_.samples_per_packet = profile_.samples_per_packet;
  if (config_.resolution_bits == 0) config_.resolution_bits = profile_.resolution_bits;
  if (config_.active_channels.empty() || config_.rate <= 0) {
    throw SessionError("session needs a negotiated device configuration");
  }
  active_channel_indices(config_, profile_);  // throws on unknown labels
  layout_ = device::FrameLayout::of(config_, profile_);
  calibration_ = profile_.calibration();
  capacity_ = static_cast<std::size_t>(options_.buffer_seconds * profile_.max_rate());
  samples_.resize(config_.active_channels.size());
  detectors_.resize(config_.active_channels.size());
}

SessionState RecordingSession::advance_locked(SessionEvent event) {
  const auto next = transition(state_, event);
  if (!next) throw TransitionError(state_, event);
  if (event == SessionEvent::kStartRecording) started_at_ = std::chrono::system_clock::now();
  if (event == SessionEvent::kStopRecording) {
    std::vector<QualityEvent> ignored;
    flush_locked(ignored);
  }
  state_ = *next;
  return state_;
}

SessionState RecordingSession::advance(SessionEvent event) {
  std::lock_guard lock(mu_);
  return advance_locked(event);
}

SessionState RecordingSession::abort(std::string reason) {
  std::lock_guard lock(mu_);
  advance_locked(SessionEvent::kAbort);
  abort_reason_ = std::move(reason);
  return state_;
}

void RecordingSession::record_event_locked(const QualityEvent& e, std::vector<QualityEvent>& out) {
  out.push_back(e);
  for (auto it = events_.rbegin(); it != events_.rend(); ++it) {
    if (it->channel != e.channel || it->kind != e.kind) continue;
    const double end = it->onset + it->duration;
    if (e.onset >= it->onset && e.onset <= end + 1e-9) {
      it->duration = std::max(end, e.onset + e.duration) - it->onset;
      it->severity = std::max(it->severity, e.severity);
      return;
    }
    break;
  }
  events_.push_back(e);
}

void RecordingSession::add_gap_locked(std::uint64_t first_frame, std::uint64_t frames,
                                      std::vector<QualityEvent>& out) {
  const double frame_s = static_cast<double>(config_.samples_per_packet) / config_.rate;
  GapEntry g{static_cast<double>(first_frame) * frame_s, static_cast<double>(frames) * frame_s, first_frame,
             frames};
  gaps_.push_back(g);
  record_event_locked({-1, QualityKind::kGap, g.onset, g.duration, Severity::kWarn}, out);
}

void RecordingSession::close_window_locked(std::size_t c, std::vector<QualityEvent>& out) {
  auto& d = detectors_[c];
  if (d.window < 0) return;
  const auto rate = static_cast<std::uint64_t>(config_.rate);
  if (d.count * 2 >= rate) {
    const double onset = static_cast<double>(d.first) / config_.rate;
    const double duration = static_cast<double>(d.last - d.first + 1) / config_.rate;
    const auto& th = options_.thresholds;
    if (static_cast<double>(d.max) - d.min < th.flatline_peak_to_peak) {
      record_event_locked({static_cast<int>(c), QualityKind::kFlatline, onset, duration, Severity::kBad}, out);
    } else {
      const double n = static_cast<double>(d.count);
      const double mean = d.sum / n;
      const double rms = std::sqrt(std::max(0.0, d.sumsq / n - mean * mean));
      if (rms < th.rms_min || rms > th.rms_max) {
        record_event_locked({static_cast<int>(c), QualityKind::kOutOfRangeRms, onset, duration, Severity::kWarn},
                            out);
      }
    }
  }
  d.window = -1;
  d.count = 0;
}

void RecordingSession::end_run_locked(std::size_t c, std::vector<QualityEvent>& out) {
  auto& d = detectors_[c];
  if (d.run_len >= static_cast<std::uint64_t>(options_.thresholds.clipping_run)) {
    record_event_locked({static_cast<int>(c), QualityKind::kClipping,
                         static_cast<double>(d.run_start) / config_.rate,
                         static_cast<double>(d.run_len) / config_.rate, Severity::kWarn},
                        out);
  }
  d.run_len = 0;
}

void RecordingSession::feed_locked(std::size_t c, std::uint64_t t, std::int32_t v,
                                   std::vector<QualityEvent>& out) {
  auto& d = detectors_[c];
  const bool contiguous = d.window >= 0 && t == d.last + 1;
  const auto w = static_cast<std::int64_t>(t / static_cast<std::uint64_t>(config_.rate));
  if (d.window >= 0 && (w != d.window || !contiguous)) close_window_locked(c, out);
  if (d.run_len > 0 && t != d.run_start + d.run_len) end_run_locked(c, out);

  if (d.window < 0) {
    d.window = w;
    d.first = t;
    d.min = d.max = v;
    d.sum = d.sumsq = 0.0;
  }
  d.min = std::min(d.min, v);
  d.max = std::max(d.max, v);
  const double x = codec::dig_to_phys(v, calibration_).value;
  d.sum += x;
  d.sumsq += x * x;
  ++d.count;
  d.last = t;

  if (v <= calibration_.digital_min || v >= calibration_.digital_max) {
    if (d.run_len == 0) d.run_start = t;
    ++d.run_len;
  } else {
    end_run_locked(c, out);
  }
}

void RecordingSession::flush_locked(std::vector<QualityEvent>& out) {
  for (std::size_t c = 0; c < detectors_.size(); ++c) {
    close_window_locked(c, out);
    end_run_locked(c, out);
  }
}

std::vector<QualityEvent> RecordingSession::ingest_frame(const device::SampleFrame& frame) {
  std::lock_guard lock(mu_);
  if (state_ != SessionState::kRecording) {
    throw SessionError("cannot ingest frames in state " + std::string(to_string(state_)));
  }
  if (frame.samples.size() != layout_.sample_count()) {
    throw SessionError("frame carries " + std::to_string(frame.samples.size()) + " samples, configuration expects " +
                       std::to_string(layout_.sample_count()));
  }
  const auto spp = static_cast<std::size_t>(config_.samples_per_packet);
  if (samples_[0].size() + spp > capacity_) {
    advance_locked(SessionEvent::kAbort);
    abort_reason_ = "buffer overflow: capacity of " + std::to_string(capacity_) + " samples per channel exceeded";
    throw SessionError(*abort_reason_);
  }
  const auto step = tracker_.observe(frame.sequence);
  std::vector<QualityEvent> out;
  if (step.duplicate) return out;
  if (step.missing > 0) add_gap_locked(step.index - step.missing, step.missing, out);
  frame_index_.push_back(step.index);
  for (std::size_t c = 0; c < samples_.size(); ++c) {
    for (std::size_t i = 0; i < spp; ++i) {
      const auto v = frame.samples[c * spp + i];
      samples_[c].push_back(v);
      feed_locked(c, step.index * spp + i, v, out);
    }
  }
  return out;
}

std::vector<QualityEvent> RecordingSession::note_stream_end(std::uint64_t frames_sent) {
  std::lock_guard lock(mu_);
  std::vector<QualityEvent> out;
  const auto next = tracker_.next_index();
  if (frames_sent > next) add_gap_locked(next, frames_sent - next, out);
  stream_end_frames_ = std::max(stream_end_frames_, frames_sent);
  flush_locked(out);
  return out;
}

SessionState RecordingSession::state() const {
  std::lock_guard lock(mu_);
  return state_;
}

SessionSummary RecordingSession::summary() const {
  std::lock_guard lock(mu_);
  SessionSummary s;
  s.session_id = session_id_;
  s.patient_ref = patient_ref_;
  s.state = state_;
  s.frames_received = tracker_.received();
  for (const auto& g : gaps_) s.frames_missing += g.frames;
  s.samples_per_channel = samples_.empty() ? 0 : samples_[0].size();
  const auto frames = std::max(tracker_.next_index(), stream_end_frames_);
  s.elapsed = static_cast<double>(frames) * config_.samples_per_packet / config_.rate;
  s.abort_reason = abort_reason_;
  return s;
}

std::vector<GapEntry> RecordingSession::gaps() const {
  std::lock_guard lock(mu_);
  return gaps_;
}

std::vector<QualityEvent> RecordingSession::quality_events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::optional<RecordingSession::SystemTime> RecordingSession::started_at() const {
  std::lock_guard lock(mu_);
  return started_at_;
}

std::optional<std::string> RecordingSession::abort_reason() const {
  std::lock_guard lock(mu_);
  return abort_reason_;
}

std::vector<std::int32_t> RecordingSession::channel_samples(std::size_t c) const {
  std::lock_guard lock(mu_);
  return samples_.at(c);
}

std::vector<std::uint64_t> RecordingSession::frame_indices() const {
  std::lock_guard lock(mu_);
  return frame_index_;
}

std::uint64_t RecordingSession::timeline_frames() const {
  std::lock_guard lock(mu_);
  return std::max(tracker_.next_index(), stream_end_frames_);
}

ViewFrame RecordingSession::view(double window_s, std::size_t n) const {
  ViewFrame v;
  v.window = window_s;
  v.labels = config_.active_channels;
  const auto want = static_cast<std::size_t>(std::max(0.0, window_s) * config_.rate);
  std::vector<std::vector<std::int32_t>> tails;
  {
    std::lock_guard lock(mu_);
    v.state = std::string(to_string(state_));
    v.frames_received = tracker_.received();
    for (const auto& g : gaps_) v.frames_missing += g.frames;
    if (!frame_index_.empty()) {
      v.t_end = static_cast<double>(frame_index_.back() + 1) * config_.samples_per_packet / config_.rate;
    }
    for (const auto& ch : samples_) {
      const std::size_t count = std::min(want, ch.size());
      tails.emplace_back(ch.end() - static_cast<std::ptrdiff_t>(count), ch.end());
    }
  }
  std::vector<double> phys;
  for (const auto& tail : tails) {
    phys.resize(tail.size());
    for (std::size_t i = 0; i < tail.size(); ++i) phys[i] = codec::dig_to_phys(tail[i], calibration_).value;
    v.channels.push_back(decimate_for_view(phys, n));
  }
  return v;
}

nlohmann::json to_json(const QualityEvent& e, const std::vector<std::string>& labels) {
  nlohmann::json j{{"kind", to_string(e.kind)},
                   {"onset", e.onset},
                   {"duration", e.duration},
                   {"severity", to_string(e.severity)}};
  if (e.channel >= 0) {
    j["channel"] = static_cast<std::size_t>(e.channel) < labels.size() ? labels[e.channel]
                                                                        : std::to_string(e.channel);
  } else {
    j["channel"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const GapEntry& g) {
  return {{"onset", g.onset}, {"duration", g.duration}, {"first_frame", g.first_frame}, {"frames", g.frames}};
}

nlohmann::json to_json(const SessionSummary& s) {
  nlohmann::json j{{"session_id", s.session_id},
                   {"patient_ref", s.patient_ref},
                   {"state", to_string(s.state)},
                   {"frames_received", s.frames_received},
                   {"frames_missing", s.frames_missing},
                   {"samples_per_channel", s.samples_per_channel},
                   {"elapsed", s.elapsed}};
  if (s.abort_reason) j["abort_reason"] = *s.abort_reason;
  return j;
}

}  // namespace eegcare::recording
