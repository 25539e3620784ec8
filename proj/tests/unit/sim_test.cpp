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

#include <cmath>
#include <fstream>
#include <numeric>

#include "eegcare/device/gaps.hpp"
#include "eegcare/sim/client.hpp"
#include "eegcare/sim/protocol.hpp"
#include "eegcare/sim/scenario.hpp"
#include "eegcare/sim/signal.hpp"
#include "eegcare/sim/virtual_device.hpp"

namespace eegcare::sim {
namespace {

using std::chrono::milliseconds;

const device::PeripheralProfile& muse() { return device::builtin_profiles().muse_like; }

SignalSpec one(Component c, std::uint64_t seed = 0) { return SignalSpec{{{c}}, seed}; }

TEST(GenerateSamples, ConstantZeroIsMidScale) {
  const auto cfg = device::default_config(muse());
  const auto out = generate_samples(one({Waveform::kConstant, 0.0}), cfg, muse().calibration(), 0, 256);
  ASSERT_EQ(out.size(), 4u);
  for (const auto& ch : out) {
    for (auto v : ch) ASSERT_EQ(v, 0);
  }
}

TEST(GenerateSamples, SineStartsAtZero) {
  const auto cfg = device::default_config(muse());
  const auto out = generate_samples(one({Waveform::kSine, 100.0, 10.0}), cfg, muse().calibration(), 0, 1);
  EXPECT_EQ(out[0][0], 0);
}

TEST(GenerateSamples, SineRmsIsAmplitudeOverRootTwo) {
  for (const auto* profile : {&device::builtin_profiles().muse_like, &device::builtin_profiles().biopot_like}) {
    const auto cfg = device::default_config(*profile);
    const auto cal = profile->calibration();
    const auto out = generate_samples(one({Waveform::kSine, 100.0, 10.0}), cfg, cal, 0,
                                      static_cast<std::size_t>(cfg.rate));
    double sum = 0.0;
    for (auto v : out[0]) {
      const double x = codec::dig_to_phys(v, cal).value;
      sum += x * x;
    }
    const double rms = std::sqrt(sum / out[0].size());
    EXPECT_NEAR(rms, 100.0 / std::sqrt(2.0), 0.01 * 100.0 / std::sqrt(2.0)) << profile->name;
  }
}

TEST(GenerateSamples, NyquistIsRejected) {
  const auto cfg = device::default_config(muse());
  EXPECT_THROW(generate_samples(one({Waveform::kSine, 1.0, 128.0}), cfg, muse().calibration(), 0, 1),
               SignalError);
  EXPECT_NO_THROW(generate_samples(one({Waveform::kSine, 1.0, 127.9}), cfg, muse().calibration(), 0, 1));
  EXPECT_THROW(generate_samples(one({Waveform::kConstant, -1.0}), cfg, muse().calibration(), 0, 1),
               SignalError);
  SignalSpec three{{{}, {}, {}}, 0};
  EXPECT_THROW(generate_samples(three, cfg, muse().calibration(), 0, 1), SignalError);
}

TEST(GenerateSamples, ChunkingDoesNotChangeOutput) {
  const auto cfg = device::default_config(muse());
  const auto spec = default_signal_spec(99);
  const auto whole = generate_samples(spec, cfg, muse().calibration(), 1000, 120);
  const auto a = generate_samples(spec, cfg, muse().calibration(), 1000, 37);
  const auto b = generate_samples(spec, cfg, muse().calibration(), 1037, 83);
  for (std::size_t c = 0; c < whole.size(); ++c) {
    auto joined = a[c];
    joined.insert(joined.end(), b[c].begin(), b[c].end());
    EXPECT_EQ(joined, whole[c]);
  }
}

TEST(GenerateSamples, NoiseIsStandardNormalAndSeeded) {
  constexpr int kN = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < kN; ++i) {
    const double z = noise_sample(5, 0, 0, static_cast<std::uint64_t>(i));
    sum += z;
    sq += z * z;
  }
  const double mean = sum / kN;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(std::sqrt(sq / kN - mean * mean), 1.0, 0.01);
  EXPECT_EQ(noise_sample(5, 1, 0, 17), noise_sample(5, 1, 0, 17));
  EXPECT_NE(noise_sample(5, 1, 0, 17), noise_sample(6, 1, 0, 17));
  EXPECT_NE(noise_sample(5, 1, 0, 17), noise_sample(5, 2, 0, 17));
}

TEST(SignalSpecJson, RoundTrip) {
  SignalSpec s{{{{Waveform::kSine, 3.0, 4.0, 0.5}, {Waveform::kWhiteNoise, 1.0}},
                {{Waveform::kConstant, 2.0}}},
               11};
  EXPECT_EQ(signal_spec_from_json(to_json(s)), s);
  const auto b = signal_spec_from_json(nlohmann::json::parse(
      R"({"components": [{"waveform": "sine", "amplitude": 100, "frequency": 10}]})"));
  EXPECT_EQ(b.channels.size(), 1u);
  EXPECT_THROW(signal_spec_from_json(nlohmann::json::parse(R"({"components": [{"waveform": "saw"}]})")),
               SignalError);
}

TEST(Faults, Validation) {
  FaultModel f;
  f.drop_probability = 1.5;
  EXPECT_THROW(check_faults(f), FaultError);
  f = {};
  f.outages = {{-1.0, 1.0}};
  EXPECT_THROW(check_faults(f), FaultError);
  f = {0.25, 20.0, 5.0, {{1.0, 0.5}}, 3};
  EXPECT_EQ(faults_from_json(to_json(f)), f);
  EXPECT_TRUE(f.outage_at(1.2).has_value());
  EXPECT_FALSE(f.outage_at(1.5).has_value());
}

TEST(Protocol, MessagesRoundTrip) {
  const auto m = decode_message(encode_message(Opcode::kStart, encode_start(2000)));
  EXPECT_EQ(m.opcode, Opcode::kStart);
  EXPECT_EQ(decode_start(m.body), 2000u);
  EXPECT_EQ(encode_start(0x01020304), (Bytes{0x04, 0x03, 0x02, 0x01}));
  const StreamSummary s{43, 2, 10};
  EXPECT_EQ(decode_stream_end(encode_stream_end(s)), s);
  EXPECT_THROW(decode_message(Bytes{}), ProtocolError);
  EXPECT_THROW(decode_message(Bytes{0x42}), ProtocolError);
  EXPECT_THROW(decode_start(Bytes{1, 2}), ProtocolError);
}

TEST(Protocol, ConfigBodyLayout) {
  const auto& biopot = device::builtin_profiles().biopot_like;
  const device::DeviceConfig c{500, 24, {"Fp1", "C3", "O2"}, 10};
  const auto body = encode_config(c, biopot);
  EXPECT_EQ(body, (Bytes{0xF4, 0x01, 0x00, 0x00, 24, 10, 0, 0b10000101, 0, 0, 0}));
  EXPECT_EQ(decode_config(body, biopot), c);
  EXPECT_THROW(encode_config({500, 24, {"Cz"}, 10}, biopot), ProtocolError);
}

TEST(MakeFrame, DeterministicAndChannelMajor) {
  const auto cfg = device::default_config(muse());
  const auto spec = default_signal_spec(3);
  const auto f = make_frame(spec, cfg, muse(), 70000);
  EXPECT_EQ(f.sequence, 70000 % 65536);
  EXPECT_EQ(f, make_frame(spec, cfg, muse(), 70000));
  const auto direct = generate_samples(spec, cfg, muse().calibration(), 70000ull * 12, 12);
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 12; ++i) ASSERT_EQ(f.samples[c * 12 + i], direct[c][i]);
  }
  EXPECT_EQ(frames_for_duration(2000, cfg), 43u);
  EXPECT_EQ(frames_for_duration(60000, cfg), 1280u);
}

struct Collected {
  std::vector<device::SampleFrame> frames;
  std::optional<StreamSummary> summary;
  int closes = 0;
  int reconnects = 0;
};

// Reads until STREAM_END, reconnecting after transport loss.
Collected collect(DeviceClient& client, milliseconds reconnect_budget = milliseconds(5000)) {
  Collected out;
  while (true) {
    auto ev = client.next(milliseconds(5000));
    switch (ev.kind) {
      case ClientEvent::Kind::kFrame:
        out.frames.push_back(std::move(ev.frame));
        break;
      case ClientEvent::Kind::kStreamEnd:
        out.summary = ev.summary;
        return out;
      case ClientEvent::Kind::kClosed:
        ++out.closes;
        client.connect(reconnect_budget);
        ++out.reconnects;
        break;
      case ClientEvent::Kind::kError:
        ADD_FAILURE() << ev.message;
        return out;
      case ClientEvent::Kind::kTimeout:
        ADD_FAILURE() << "timeout";
        return out;
    }
  }
}

std::uint64_t total_missing(const std::vector<device::SampleFrame>& frames, std::uint64_t sent) {
  device::SequenceTracker t;
  std::uint64_t missing = 0;
  for (const auto& f : frames) missing += t.observe(f.sequence).missing;
  return missing + (sent - t.next_index());
}

TEST(VirtualDevice, TwoSecondRunDeliversFortyThreeFrames) {
  for (const auto pacing : {Pacing::kFast, Pacing::kRealtime}) {
    DeviceOptions opts;
    opts.pacing = pacing;
    auto dev = run_virtual_device(muse(), default_signal_spec(1), {}, opts);
    DeviceClient client(dev->endpoint());
    client.connect();
    EXPECT_EQ(client.discover(), muse());
    client.configure(device::default_config(muse()));
    const auto begin = std::chrono::steady_clock::now();
    client.start(2000);
    const auto got = collect(client);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - begin).count();
    client.close();
    ASSERT_EQ(got.frames.size(), 43u);
    for (std::size_t i = 0; i < got.frames.size(); ++i) ASSERT_EQ(got.frames[i].sequence, i);
    ASSERT_TRUE(got.summary);
    EXPECT_EQ(got.summary->frames_sent, 43u);
    const auto rep = dev->wait();
    EXPECT_FALSE(rep.error);
    EXPECT_EQ(rep.frames_sent, 43u);
    EXPECT_EQ(rep.frames_delivered, 43u);
    if (pacing == Pacing::kRealtime) {
      // 43 frames of 12 samples at 256 Hz span 2.016 s.
      EXPECT_NEAR(elapsed, 43.0 * 12 / 256, 0.05 * 2.0);
    }
  }
}

TEST(VirtualDevice, RealtimeThroughputWithinFivePercent) {
  const auto& biopot = device::builtin_profiles().biopot_like;
  DeviceOptions opts;
  opts.config = device::DeviceConfig{1000, 24, {}, 0};
  auto dev = run_virtual_device(biopot, default_signal_spec(2), {}, opts);
  DeviceClient client(dev->endpoint());
  client.connect();
  client.discover();
  client.configure({1000, 24, {}, 0});
  client.start(3000);
  std::vector<std::chrono::steady_clock::time_point> arrivals;
  while (true) {
    auto ev = client.next(milliseconds(2000));
    if (ev.kind != ClientEvent::Kind::kFrame) break;
    arrivals.push_back(std::chrono::steady_clock::now());
  }
  ASSERT_EQ(arrivals.size(), 300u);
  const double span = std::chrono::duration<double>(arrivals.back() - arrivals.front()).count();
  const double rate = (arrivals.size() - 1) / span;
  EXPECT_NEAR(rate, 1000.0 / 10.0, 0.05 * 100.0);
}

TEST(VirtualDevice, DropAllStillDiscovers) {
  FaultModel f;
  f.drop_probability = 1.0;
  DeviceOptions opts;
  opts.pacing = Pacing::kFast;
  auto dev = run_virtual_device(muse(), default_signal_spec(), f, opts);
  DeviceClient client(dev->endpoint());
  client.connect();
  EXPECT_EQ(client.discover().name, "muse-like");
  client.start(2000);
  const auto got = collect(client);
  client.close();
  EXPECT_TRUE(got.frames.empty());
  ASSERT_TRUE(got.summary);
  EXPECT_EQ(got.summary->frames_sent, 43u);
  EXPECT_EQ(got.summary->frames_dropped, 43u);
  EXPECT_EQ(dev->wait().frames_delivered, 0u);
}

TEST(VirtualDevice, OutageClosesThenReconnects) {
  // Frames k with k * 12/256 in [1.0, 1.5): k = 22..31.
  const std::uint64_t expected_missing = 10;
  for (const auto pacing : {Pacing::kFast, Pacing::kRealtime}) {
    FaultModel f;
    f.outages = {{1.0, 0.5}};
    DeviceOptions opts;
    opts.pacing = pacing;
    auto dev = run_virtual_device(muse(), default_signal_spec(), f, opts);
    DeviceClient client(dev->endpoint());
    client.connect();
    client.discover();
    client.start(2000);
    const auto got = collect(client);
    client.close();
    EXPECT_EQ(got.closes, 1);
    EXPECT_EQ(got.reconnects, 1);
    ASSERT_TRUE(got.summary);
    const auto missing = total_missing(got.frames, got.summary->frames_sent);
    const double analytic = 0.5 * 256 / 12;  // 10.67 frames
    EXPECT_NEAR(static_cast<double>(missing), analytic, 1.0);
    EXPECT_EQ(missing, expected_missing);
    EXPECT_EQ(got.frames.size() + missing, 43u);
    const auto rep = dev->wait();
    EXPECT_EQ(rep.outages, 1u);
    EXPECT_EQ(rep.connections, 2u);
  }
}

TEST(VirtualDevice, IdenticalSeedsGiveIdenticalStreams) {
  auto run = [] {
    FaultModel f;
    f.drop_probability = 0.3;
    f.seed = 77;
    DeviceOptions opts;
    opts.pacing = Pacing::kFast;
    auto dev = run_virtual_device(muse(), default_signal_spec(5), f, opts);
    DeviceClient client(dev->endpoint());
    client.connect();
    client.discover();
    client.start(5000);
    auto got = collect(client);
    client.close();
    dev->wait();
    return got;
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.frames, b.frames);
  EXPECT_GT(a.frames.size(), 0u);
  EXPECT_LT(a.frames.size(), 107u);
  // Every received frame equals the pre-fault frame of the same index.
  const auto cfg = device::default_config(muse());
  for (const auto& f : a.frames) {
    ASSERT_EQ(f, make_frame(default_signal_spec(5), cfg, muse(), f.sequence));
  }
}

TEST(VirtualDevice, StopEndsStreamEarly) {
  auto dev = run_virtual_device(muse(), default_signal_spec(), {});
  DeviceClient client(dev->endpoint());
  client.connect();
  client.discover();
  client.start(0);
  int frames = 0;
  while (frames < 5) {
    auto ev = client.next(milliseconds(2000));
    ASSERT_EQ(ev.kind, ClientEvent::Kind::kFrame);
    ++frames;
  }
  client.stop();
  std::optional<StreamSummary> summary;
  while (!summary) {
    auto ev = client.next(milliseconds(2000));
    ASSERT_NE(ev.kind, ClientEvent::Kind::kTimeout);
    if (ev.kind == ClientEvent::Kind::kStreamEnd) summary = ev.summary;
  }
  EXPECT_GE(summary->frames_sent, 5u);
  client.close();
  EXPECT_EQ(dev->wait().frames_sent, summary->frames_sent);
}

TEST(VirtualDevice, ControlErrorsAndBusyEndpoint) {
  auto dev = run_virtual_device(muse(), default_signal_spec(), {});
  EXPECT_THROW(run_virtual_device(muse(), default_signal_spec(), {}, DeviceOptions{dev->endpoint()}),
               net::TransportError);

  DeviceClient client(dev->endpoint());
  client.connect();
  client.discover();
  EXPECT_THROW(client.configure({256, 12, {"Cz"}, 0}), DeviceError);
  const auto c = client.configure({100, 12, {"TP10", "AF7"}, 0});
  EXPECT_EQ(c.rate, 256);
  EXPECT_EQ(c.active_channels, (std::vector<std::string>{"AF7", "TP10"}));

  DeviceClient second(dev->endpoint());
  second.connect();
  const auto ev = second.next(milliseconds(2000));
  EXPECT_EQ(ev.kind, ClientEvent::Kind::kError);
  EXPECT_EQ(ev.message, "device busy");

  client.start(200);
  EXPECT_THROW(client.configure({256, 12, {}, 0}), DeviceError);
  client.close();
  dev->stop();
  EXPECT_FALSE(dev->wait().error);
}

TEST(Scenario, LoadsBundledFile) {
  const auto s = load_scenario(std::string(EEGCARE_DATA_DIR) + "/scenarios/muse-outage.json");
  EXPECT_EQ(s.profile.name, "muse-like");
  ASSERT_EQ(s.faults.outages.size(), 1u);
  EXPECT_EQ(s.faults.outages[0], (Outage{1.0, 0.5}));
  EXPECT_EQ(scenario_from_json(to_json(s)).faults, s.faults);
}

}  // namespace
}  // namespace eegcare::sim
