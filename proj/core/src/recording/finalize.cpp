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

#include "eegcare/recording/finalize.hpp"

#include <algorithm>

namespace eegcare::recording {

namespace {

bool only_overflow(const std::vector<codec::Finding>& findings) {
  return !findings.empty() && std::all_of(findings.begin(), findings.end(), [](const codec::Finding& f) {
    return f.code == "annotation-overflow";
  });
}

}  // namespace

FinalizedRecording finalize_session(RecordingSession& session, const FinalizeOptions& options) {
  if (session.state() != SessionState::kFinalizing) {
    throw TransitionError(session.state(), SessionEvent::kFinalizeSucceeded);
  }
  const auto& profile = session.profile();
  const auto& config = session.config();
  const auto indices = session.frame_indices();
  if (indices.empty()) throw SessionError("session recorded no samples");

  const auto channels = config.active_channels.size();
  const auto spp = static_cast<std::uint64_t>(config.samples_per_packet);
  const auto rate = static_cast<std::uint64_t>(config.rate);
  const auto frames = session.timeline_frames();
  const std::uint64_t timeline = frames * spp;
  const std::uint64_t record_count = (timeline + rate - 1) / rate;
  const auto cal = profile.calibration();
  const std::int32_t fill = codec::phys_to_dig(0.0, cal).value;

  codec::SignalFileModel m;
  m.header.width = options.width.value_or(profile.resolution_bits <= 16 ? codec::SampleWidth::kEdf16
                                                                        : codec::SampleWidth::kBdf24);
  if (cal.digital_min < codec::format_digital_min(m.header.width) ||
      cal.digital_max > codec::format_digital_max(m.header.width)) {
    throw SessionError("device resolution does not fit the requested file format");
  }
  const auto start = std::chrono::time_point_cast<std::chrono::seconds>(
      options.start.value_or(session.started_at().value_or(std::chrono::system_clock::now())));
  m.header.patient_id = codec::format_patient_field(options.patient, options.anonymize);
  m.header.recording_id = codec::format_recording_field(
      std::chrono::year_month_day(std::chrono::floor<std::chrono::days>(start)),
      options.anonymize ? "X" : session.session_id(), options.technician.empty() ? "X" : options.technician,
      profile.name);
  m.header.start_date = codec::format_start_date(start);
  m.header.start_time = codec::format_start_time(start);
  m.header.continuity = codec::Continuity::kContinuous;
  m.header.record_duration = 1.0;
  m.header.record_count = static_cast<std::int64_t>(record_count);

  for (const auto& label : config.active_channels) {
    codec::SignalHeader s;
    s.label = label;
    s.transducer = profile.transducer;
    s.physical_dimension = profile.physical_dimension;
    s.physical_min = profile.physical_min;
    s.physical_max = profile.physical_max;
    s.digital_min = cal.digital_min;
    s.digital_max = cal.digital_max;
    s.prefiltering = profile.prefiltering;
    s.samples_per_record = static_cast<std::int32_t>(rate);
    m.signals.push_back(std::move(s));
  }

  // Timeline-ordered samples, zero-filled where frames are missing.
  m.records.assign(record_count, codec::DataRecord(channels, std::vector<std::int32_t>(rate, fill)));
  for (std::size_t c = 0; c < channels; ++c) {
    const auto samples = session.channel_samples(c);
    for (std::size_t f = 0; f < indices.size(); ++f) {
      const std::uint64_t t0 = indices[f] * spp;
      for (std::uint64_t i = 0; i < spp; ++i) {
        const std::uint64_t t = t0 + i;
        m.records[t / rate][c][t % rate] = samples[f * spp + i];
      }
    }
  }

  for (const auto& g : session.gaps()) {
    m.annotations.push_back({g.onset, g.duration, {std::string(kGapAnnotation)}});
  }
  for (const auto& e : session.quality_events()) {
    if (e.kind == QualityKind::kGap) continue;  // already a GAP annotation
    const std::string channel = e.channel >= 0 ? config.active_channels.at(e.channel) : "all";
    m.annotations.push_back({e.onset, e.duration,
                             {"QUALITY " + std::string(to_string(e.kind)) + " " + channel + " " +
                              std::string(to_string(e.severity))}});
  }
  const double covered = static_cast<double>(timeline) / rate;
  if (timeline % rate != 0) {
    m.annotations.push_back({covered, static_cast<double>(record_count) - covered, {std::string(kPadAnnotation)}});
  }
  std::stable_sort(m.annotations.begin(), m.annotations.end(),
                   [](const codec::Annotation& a, const codec::Annotation& b) { return a.onset < b.onset; });

  auto findings = codec::validate(m);
  while (only_overflow(findings) && m.annotation_samples_per_record < (1 << 20)) {
    m.annotation_samples_per_record *= 2;
    findings = codec::validate(m);
  }
  if (!findings.empty()) throw codec::CodecError(findings);

  FinalizedRecording out;
  out.bytes = codec::encode_file(m);
  const auto summary = session.summary();
  nlohmann::json gaps = nlohmann::json::array();
  for (const auto& g : session.gaps()) gaps.push_back(to_json(g));
  nlohmann::json events = nlohmann::json::array();
  for (const auto& e : session.quality_events()) events.push_back(to_json(e, config.active_channels));
  out.metadata = {{"session_id", session.session_id()},
                  {"patient_ref", session.patient_ref()},
                  {"device", profile.name},
                  {"config", device::to_json(config)},
                  {"format", m.header.width == codec::SampleWidth::kBdf24 ? "BDF+" : "EDF+"},
                  {"duration", static_cast<double>(record_count)},
                  {"recorded_duration", covered},
                  {"records", record_count},
                  {"frames_received", summary.frames_received},
                  {"frames_missing", summary.frames_missing},
                  {"gaps", gaps},
                  {"quality_events", events}};
  out.model = std::move(m);
  session.advance(SessionEvent::kFinalizeSucceeded);
  return out;
}

}  // namespace eegcare::recording
