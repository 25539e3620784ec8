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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "eegcare/codec/codec.hpp"
#include "eegcare/recording/finalize.hpp"
#include "eegcare/recording/recorder.hpp"
#include "eegcare/recording/session.hpp"
#include "eegcare/recording/view.hpp"
#include "eegcare/sim/virtual_device.hpp"

namespace eegcare::recording {
namespace {

using S = SessionState;
using E = SessionEvent;

const device::PeripheralProfile& muse() { return device::builtin_profiles().muse_like; }

std::unique_ptr<RecordingSession> recording_session(const device::PeripheralProfile& p = muse(),
                                                    SessionOptions opts = {}) {
  auto s = std::make_unique<RecordingSession>("s-1", "p-1", p, device::default_config(p), opts);
  s->advance(E::kDeviceConnected);
  s->advance(E::kPlacementVerified);
  s->advance(E::kStartRecording);
  return s;
}

device::SampleFrame constant_frame(std::uint16_t seq, std::int32_t v, const device::PeripheralProfile& p = muse()) {
  const auto layout = device::FrameLayout::of(p);
  return {seq, 0, std::vector<std::int32_t>(layout.sample_count(), v)};
}

TEST(Transition, TableExamples) {
  EXPECT_EQ(transition(S::kIdle, E::kDeviceConnected), S::kConnected);
  EXPECT_EQ(transition(S::kRecording, E::kTransportLost), S::kReconnecting);
  EXPECT_EQ(transition(S::kMounted, E::kStartRecording), S::kRecording);
  EXPECT_EQ(transition(S::kReconnecting, E::kTransportRestored), S::kRecording);
  EXPECT_EQ(transition(S::kRecording, E::kStopRecording), S::kFinalizing);
  EXPECT_EQ(transition(S::kFinalizing, E::kFinalizeSucceeded), S::kComplete);
  EXPECT_EQ(transition(S::kConnected, E::kAbort), S::kAborted);
  EXPECT_FALSE(transition(S::kComplete, E::kAbort));
  EXPECT_FALSE(transition(S::kAborted, E::kAbort));
  EXPECT_FALSE(transition(S::kIdle, E::kStartRecording));
  EXPECT_FALSE(transition(S::kReconnecting, E::kStopRecording));
}

TEST(Advance, SetsStartTimeAndRejectsIllegal) {
  RecordingSession s("s", "p", muse(), device::default_config(muse()));
  try {
    s.advance(E::kStartRecording);
    FAIL();
  } catch (const TransitionError& e) {
    EXPECT_EQ(std::string(e.what()), "event start-recording is not allowed in state Idle");
  }
  EXPECT_EQ(s.state(), S::kIdle);
  s.advance(E::kDeviceConnected);
  s.advance(E::kPlacementVerified);
  EXPECT_FALSE(s.started_at());
  s.advance(E::kStartRecording);
  EXPECT_TRUE(s.started_at());
}

TEST(Advance, RandomEventSequencesFollowTheChain) {
  // Oracle: the documented chain, written independently as allowed edges.
  const std::set<std::pair<S, S>> edges = {
      {S::kIdle, S::kConnected},         {S::kConnected, S::kMounted},       {S::kMounted, S::kRecording},
      {S::kRecording, S::kReconnecting}, {S::kReconnecting, S::kRecording}, {S::kRecording, S::kFinalizing},
      {S::kFinalizing, S::kComplete}};
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, std::size(kAllSessionEvents) - 1);
  for (int trial = 0; trial < 5000; ++trial) {
    RecordingSession s("s", "p", muse(), device::default_config(muse()));
    bool recorded = false;
    for (int i = 0; i < 30; ++i) {
      const auto before = s.state();
      const auto e = kAllSessionEvents[pick(rng)];
      try {
        const auto after = s.advance(e);
        if (after == S::kAborted) {
          ASSERT_NE(before, S::kComplete);
          ASSERT_NE(before, S::kAborted);
        } else {
          ASSERT_TRUE(edges.count({before, after})) << to_string(before) << " -> " << to_string(after);
        }
        if (after == S::kRecording) recorded = true;
        if (after == S::kComplete) ASSERT_TRUE(recorded);
      } catch (const TransitionError&) {
        ASSERT_EQ(s.state(), before);
      }
    }
  }
}

TEST(Ingest, ConstantStreamIsFlatline) {
  auto s = recording_session();
  std::vector<QualityEvent> emitted;
  const int frames = 2 * 256 / 12 + 1;  // just over 2 s
  for (int k = 0; k < frames; ++k) {
    auto ev = s->ingest_frame(constant_frame(static_cast<std::uint16_t>(k), 100));
    emitted.insert(emitted.end(), ev.begin(), ev.end());
  }
  s->note_stream_end(frames);
  const auto events = s->quality_events();
  ASSERT_EQ(events.size(), 4u);  // one merged span per channel
  for (const auto& e : events) {
    EXPECT_EQ(e.kind, QualityKind::kFlatline);
    EXPECT_EQ(e.severity, Severity::kBad);
    EXPECT_DOUBLE_EQ(e.onset, 0.0);
    // The trailing 4-sample window is below half a second and not evaluated.
    EXPECT_NEAR(e.duration, 2.0, 1e-9);
  }
  EXPECT_GE(emitted.size(), 8u);
}

TEST(Ingest, RailRunIsClipping) {
  auto s = recording_session();
  const auto layout = device::FrameLayout::of(muse());
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> noise(-200, 200);
  // Samples 100..139 of channel 1 sit at digital max.
  for (int k = 0; k < 30; ++k) {
    device::SampleFrame f{static_cast<std::uint16_t>(k), 0, std::vector<std::int32_t>(layout.sample_count())};
    for (int c = 0; c < 4; ++c) {
      for (int i = 0; i < 12; ++i) {
        const int t = k * 12 + i;
        f.samples[c * 12 + i] = (c == 1 && t >= 100 && t < 140) ? 2047 : noise(rng);
      }
    }
    s->ingest_frame(f);
  }
  const auto events = s->quality_events();
  const auto it = std::find_if(events.begin(), events.end(),
                               [](const QualityEvent& e) { return e.kind == QualityKind::kClipping; });
  ASSERT_NE(it, events.end());
  EXPECT_EQ(it->channel, 1);
  EXPECT_DOUBLE_EQ(it->onset, 100.0 / 256);
  EXPECT_DOUBLE_EQ(it->duration, 40.0 / 256);
  EXPECT_EQ(std::count_if(events.begin(), events.end(),
                          [](const QualityEvent& e) { return e.kind == QualityKind::kClipping; }),
            1);
}

TEST(Ingest, ShortRailRunIsNotClipping) {
  auto s = recording_session();
  for (int k = 0; k < 3; ++k) s->ingest_frame(constant_frame(static_cast<std::uint16_t>(k), k == 1 ? 2047 : 3));
  s->note_stream_end(3);
  for (const auto& e : s->quality_events()) EXPECT_NE(e.kind, QualityKind::kClipping);
}

TEST(Ingest, SkippedFrameLogsOneFrameGap) {
  auto s = recording_session();
  s->ingest_frame(constant_frame(0, 1));
  s->ingest_frame(constant_frame(1, 2));
  const auto ev = s->ingest_frame(constant_frame(3, 3));
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].kind, QualityKind::kGap);
  EXPECT_EQ(ev[0].channel, -1);
  const auto gaps = s->gaps();
  ASSERT_EQ(gaps.size(), 1u);
  EXPECT_DOUBLE_EQ(gaps[0].onset, 2 * 12.0 / 256);
  EXPECT_DOUBLE_EQ(gaps[0].duration, 12.0 / 256);
  EXPECT_EQ(s->summary().samples_per_channel, 36u);
}

TEST(Ingest, LeadingAndTrailingLossAreGaps) {
  auto s = recording_session();
  s->ingest_frame(constant_frame(2, 1));
  s->note_stream_end(6);
  const auto gaps = s->gaps();
  ASSERT_EQ(gaps.size(), 2u);
  EXPECT_EQ(gaps[0], (GapEntry{0.0, 2 * 12.0 / 256, 0, 2}));
  EXPECT_EQ(gaps[1].first_frame, 3u);
  EXPECT_EQ(gaps[1].frames, 3u);
  EXPECT_EQ(s->timeline_frames(), 6u);
}

TEST(Ingest, OutOfRangeRms) {
  const auto& biopot = device::builtin_profiles().biopot_like;
  auto s = recording_session(biopot);
  const auto cfg = device::default_config(biopot);
  const auto cal = biopot.calibration();
  const auto layout = device::FrameLayout::of(cfg, biopot);
  // 1000 uV square wave on every channel: RMS 1000 > 300.
  const int frames = cfg.rate / cfg.samples_per_packet;
  for (int k = 0; k < frames; ++k) {
    device::SampleFrame f{static_cast<std::uint16_t>(k), 0, std::vector<std::int32_t>(layout.sample_count())};
    for (std::size_t i = 0; i < f.samples.size(); ++i) {
      f.samples[i] = codec::phys_to_dig(i % 2 ? 1000.0 : -1000.0, cal).value;
    }
    s->ingest_frame(f);
  }
  s->note_stream_end(frames);
  const auto events = s->quality_events();
  ASSERT_EQ(events.size(), 8u);
  for (const auto& e : events) {
    EXPECT_EQ(e.kind, QualityKind::kOutOfRangeRms);
    EXPECT_EQ(e.severity, Severity::kWarn);
  }
}

TEST(Ingest, Errors) {
  auto s = recording_session();
  EXPECT_THROW(s->ingest_frame({0, 0, std::vector<std::int32_t>(7)}), SessionError);
  s->advance(E::kTransportLost);
  EXPECT_THROW(s->ingest_frame(constant_frame(0, 0)), SessionError);
}

TEST(Ingest, OverflowAborts) {
  SessionOptions opts;
  opts.buffer_seconds = 0.1;  // 25 samples at 256 Hz
  auto s = recording_session(muse(), opts);
  s->ingest_frame(constant_frame(0, 0));
  s->ingest_frame(constant_frame(1, 0));
  EXPECT_THROW(s->ingest_frame(constant_frame(2, 0)), SessionError);
  EXPECT_EQ(s->state(), S::kAborted);
  EXPECT_NE(s->abort_reason()->find("buffer overflow"), std::string::npos);
}

TEST(Decimate, Examples) {
  const std::vector<double> v{1, 5, -2};
  EXPECT_EQ(decimate_for_view(v, 1), (std::vector<MinMax>{{-2, 5}}));
  EXPECT_EQ(decimate_for_view(v, 3), (std::vector<MinMax>{{1, 1}, {5, 5}, {-2, -2}}));
  EXPECT_EQ(decimate_for_view(v, 10).size(), 3u);
  EXPECT_TRUE(decimate_for_view(std::vector<double>{}, 4).empty());
  EXPECT_THROW(decimate_for_view(v, 0), std::invalid_argument);
}

TEST(Decimate, SineEnvelopeReachesAmplitude) {
  const auto cal = muse().calibration();
  std::vector<double> x;
  for (int i = 0; i < 256 * 4; ++i) {
    const double phys = 100.0 * std::sin(2 * M_PI * 7.0 * i / 256);
    x.push_back(codec::dig_to_phys(codec::phys_to_dig(phys, cal).value, cal).value);
  }
  for (std::size_t n : {2u, 3u, 17u, 100u, 1024u}) {
    const auto out = decimate_for_view(x, n);
    double mx = -1e9;
    for (const auto& p : out) mx = std::max(mx, p.max);
    EXPECT_NEAR(mx, 100.0, cal.step()) << n;
  }
}

TEST(Decimate, EnvelopeIsPreservedForRandomInput) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> d(0, 50);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> x(1 + rng() % 3000);
    for (auto& v : x) v = d(rng);
    const std::size_t n = 1 + rng() % 400;
    const auto out = decimate_for_view(x, n);
    ASSERT_EQ(out.size(), std::min(n, x.size()));
    double mn = 1e300, mx = -1e300;
    for (const auto& p : out) {
      mn = std::min(mn, p.min);
      mx = std::max(mx, p.max);
    }
    ASSERT_EQ(mn, *std::min_element(x.begin(), x.end()));
    ASSERT_EQ(mx, *std::max_element(x.begin(), x.end()));
  }
}

TEST(View, ReadersSeeConsistentSnapshots) {
  auto s = recording_session();
  const auto spec = sim::default_signal_spec(4);
  const auto cfg = device::default_config(muse());
  std::atomic<bool> done{false};
  std::vector<std::thread> readers;
  std::atomic<int> views{0};
  for (int r = 0; r < 4; ++r) {
    readers.emplace_back([&] {
      while (!done) {
        const auto v = s->view(2.0, 50);
        ASSERT_EQ(v.channels.size(), 4u);
        for (const auto& ch : v.channels) {
          ASSERT_EQ(ch.size(), v.channels[0].size());
          for (const auto& p : ch) ASSERT_LE(p.min, p.max);
        }
        ++views;
      }
    });
  }
  for (std::uint64_t k = 0; k < 2000; ++k) s->ingest_frame(sim::make_frame(spec, cfg, muse(), k));
  done = true;
  for (auto& t : readers) t.join();
  EXPECT_GT(views.load(), 0);
  const auto v = s->view(1.0, 256);
  EXPECT_EQ(v.channels[0].size(), 256u);
  EXPECT_NEAR(v.t_end, 2000 * 12.0 / 256, 1e-9);
}

// Ingests frames of the pre-fault stream except those in `skip`.
std::unique_ptr<RecordingSession> synthetic(std::uint64_t frames, const std::set<std::uint64_t>& skip,
                                            const device::PeripheralProfile& p = muse()) {
  auto s = recording_session(p);
  const auto cfg = device::default_config(p);
  const auto spec = sim::default_signal_spec(9);
  for (std::uint64_t k = 0; k < frames; ++k) {
    if (!skip.count(k)) s->ingest_frame(sim::make_frame(spec, cfg, p, k));
  }
  s->note_stream_end(frames);
  s->advance(E::kStopRecording);
  return s;
}

TEST(Finalize, SixtySecondMuseSession) {
  auto s = synthetic(1280, {});
  const auto out = finalize_session(*s);
  EXPECT_EQ(s->state(), S::kComplete);
  const auto m = codec::decode_file(out.bytes);
  EXPECT_EQ(m.header.record_count, 60);
  ASSERT_EQ(m.signals.size(), 4u);
  EXPECT_EQ(m.header.width, codec::SampleWidth::kEdf16);
  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<std::int32_t> decoded;
    for (const auto& r : m.records) decoded.insert(decoded.end(), r[c].begin(), r[c].end());
    ASSERT_EQ(decoded.size(), 15360u);
    ASSERT_EQ(decoded, s->channel_samples(c));
  }
  for (const auto& a : m.annotations) {
    EXPECT_NE(a.texts.at(0), "GAP");
    EXPECT_NE(a.texts.at(0), "PAD");
  }
  EXPECT_TRUE(codec::validate(m).empty());
  EXPECT_EQ(out.metadata["records"], 60);
}

TEST(Finalize, GapIsZeroFilledAndAnnotated) {
  std::set<std::uint64_t> skip;
  for (std::uint64_t k = 22; k < 32; ++k) skip.insert(k);
  auto s = synthetic(43, skip);
  const auto out = finalize_session(*s);
  const auto m = codec::decode_file(out.bytes);
  std::vector<codec::Annotation> gaps, pads;
  for (const auto& a : m.annotations) {
    if (a.texts.at(0) == "GAP") gaps.push_back(a);
    if (a.texts.at(0) == "PAD") pads.push_back(a);
  }
  ASSERT_EQ(gaps.size(), 1u);
  EXPECT_NEAR(*gaps[0].duration, 0.5, 12.0 / 256);
  EXPECT_DOUBLE_EQ(gaps[0].onset, 22 * 12.0 / 256);
  ASSERT_EQ(pads.size(), 1u);
  EXPECT_DOUBLE_EQ(pads[0].onset, 43 * 12.0 / 256);
  EXPECT_EQ(m.header.record_count, 3);

  // Outside the gap the file reproduces the buffer; inside it is zero.
  const auto idx = s->frame_indices();
  for (std::size_t c = 0; c < 4; ++c) {
    std::vector<std::int32_t> flat;
    for (const auto& r : m.records) flat.insert(flat.end(), r[c].begin(), r[c].end());
    const auto buf = s->channel_samples(c);
    for (std::size_t f = 0; f < idx.size(); ++f) {
      for (std::size_t i = 0; i < 12; ++i) ASSERT_EQ(flat[idx[f] * 12 + i], buf[f * 12 + i]);
    }
    for (std::size_t t = 22 * 12; t < 32 * 12; ++t) ASSERT_EQ(flat[t], 0);
  }
  // Onsets are non-decreasing.
  for (std::size_t i = 1; i < m.annotations.size(); ++i) {
    EXPECT_LE(m.annotations[i - 1].onset, m.annotations[i].onset);
  }
}

TEST(Finalize, EmptySessionIsAnError) {
  auto s = synthetic(0, {});
  EXPECT_THROW(finalize_session(*s), SessionError);
  EXPECT_EQ(s->state(), S::kFinalizing);
  auto live = recording_session();
  EXPECT_THROW(finalize_session(*live), TransitionError);
}

TEST(Finalize, PatientFieldAndWidth) {
  auto s = synthetic(30, {}, device::builtin_profiles().biopot_like);
  FinalizeOptions opts;
  opts.patient = {"MCH-0001", 'F', std::chrono::year{2022} / 8 / 2, "Lee_Leland"};
  const auto out = finalize_session(*s, opts);
  const auto m = codec::decode_file(out.bytes);
  EXPECT_EQ(m.header.width, codec::SampleWidth::kBdf24);
  EXPECT_EQ(m.header.patient_id, "MCH-0001 F 02-AUG-2022 Lee_Leland");
  EXPECT_EQ(m.signals[0].digital_min, -8388608);
  EXPECT_EQ(m.signals[0].samples_per_record, device::default_config(device::builtin_profiles().biopot_like).rate);

  auto t = synthetic(30, {});
  opts.anonymize = true;
  const auto anon = codec::decode_file(finalize_session(*t, opts).bytes);
  EXPECT_EQ(anon.header.patient_id, "MCH-0001 F 02-AUG-2022 X");
}

TEST(Finalize, ManyQualityEventsFitAfterGrowingAnnotationSpace) {
  auto s = recording_session();
  // Alternate flat and clipped seconds on every channel.
  for (std::uint64_t k = 0; k < 1280; ++k) {
    const bool clip = (k / 21) % 2 == 1;
    s->ingest_frame(constant_frame(static_cast<std::uint16_t>(k), clip ? 2047 : 0));
  }
  s->note_stream_end(1280);
  s->advance(E::kStopRecording);
  const auto out = finalize_session(*s);
  EXPECT_GT(out.model.annotation_samples_per_record, codec::kDefaultAnnotationSamplesPerRecord);
  const auto m = codec::decode_file(out.bytes);
  EXPECT_EQ(m.annotations.size(), out.model.annotations.size());
}

// Records from a simulator over the loopback transport.
struct Run {
  RecordingResult result;
  sim::DeviceReport device;
  std::shared_ptr<RecordingSession> session;
};

Run record_from_simulator(sim::FaultModel faults, std::uint32_t duration_ms, sim::Pacing pacing) {
  sim::DeviceOptions dopts;
  dopts.pacing = pacing;
  auto dev = sim::run_virtual_device(muse(), sim::default_signal_spec(3), faults, dopts);
  RecorderOptions ropts;
  ropts.duration_ms = duration_ms;
  Recorder rec(dev->endpoint(), "sess", "patient", ropts);
  auto session = rec.connect();
  rec.confirm_placement();
  rec.start();
  Run run{rec.wait(), {}, session};
  run.device = dev->wait();
  return run;
}

TEST(Recorder, FaultFreeSixtySecondsYieldsExactSampleCount) {
  auto run = record_from_simulator({}, 60000, sim::Pacing::kFast);
  ASSERT_FALSE(run.result.error) << *run.result.error;
  EXPECT_EQ(run.result.state, S::kFinalizing);
  const auto out = finalize_session(*run.session);
  const auto m = codec::decode_file(out.bytes);
  EXPECT_EQ(m.header.record_count, 60);
  for (const auto& r : m.records) ASSERT_EQ(r[0].size(), 256u);
  EXPECT_EQ(m.records.size() * 256, 15360u);
  EXPECT_EQ(run.session->summary().samples_per_channel, 15360u);
}

TEST(Recorder, OutageBecomesGapAnnotation) {
  sim::FaultModel f;
  f.outages = {{1.0, 0.5}};
  auto run = record_from_simulator(f, 2000, sim::Pacing::kRealtime);
  ASSERT_FALSE(run.result.error) << *run.result.error;
  EXPECT_EQ(run.result.reconnects, 1);
  const auto m = codec::decode_file(finalize_session(*run.session).bytes);
  int gaps = 0;
  for (const auto& a : m.annotations) {
    if (a.texts.at(0) != "GAP") continue;
    ++gaps;
    EXPECT_NEAR(*a.duration, 0.5, 12.0 / 256);
  }
  EXPECT_EQ(gaps, 1);
}

TEST(Recorder, ConservationUnderSeededDrops) {
  sim::FaultModel f;
  f.drop_probability = 0.1;
  f.seed = 21;
  f.outages = {{3.0, 0.25}};
  auto run = record_from_simulator(f, 10000, sim::Pacing::kFast);
  ASSERT_FALSE(run.result.error) << *run.result.error;
  const auto sent = run.device.frames_sent;
  const auto faulted = run.device.frames_dropped + run.device.frames_lost;
  const auto out = finalize_session(*run.session);
  const auto m = codec::decode_file(out.bytes);
  double gap_seconds = 0.0;
  for (const auto& a : m.annotations) {
    if (a.texts.at(0) == "GAP") gap_seconds += *a.duration;
  }
  const double frame_s = 12.0 / 256;
  EXPECT_EQ(run.session->summary().samples_per_channel, (sent - faulted) * 12);
  EXPECT_NEAR(gap_seconds, faulted * frame_s, 1e-6);
  EXPECT_NEAR(run.session->summary().samples_per_channel / 256.0 + gap_seconds, sent * frame_s, 1e-6);
}

TEST(Recorder, UnreachableDeviceThrows) {
  RecorderOptions opts;
  opts.connect_timeout = std::chrono::milliseconds(200);
  Recorder rec(net::Endpoint{"127.0.0.1", 1}, "s", "p", opts);
  EXPECT_THROW(rec.connect(), net::TransportError);
}

}  // namespace
}  // namespace eegcare::recording
