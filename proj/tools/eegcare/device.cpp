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

// simulate, record

#include <atomic>
#include <csignal>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "eegcare/codec/codec.hpp"
#include "eegcare/gateway/store.hpp"
#include "eegcare/recording/finalize.hpp"
#include "eegcare/recording/recorder.hpp"
#include "eegcare/sim/scenario.hpp"
#include "eegcare/sim/virtual_device.hpp"

namespace eegcare::cli {

namespace {

using nlohmann::json;

std::uint32_t to_ms(double seconds) {
  if (!(seconds >= 0.0) || seconds > 86400.0) throw std::invalid_argument("duration must be in [0, 86400] s");
  return static_cast<std::uint32_t>(seconds * 1000.0 + 0.5);
}

sim::Outage parse_outage(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("--outage wants AT:DOWN seconds, got " + text);
  return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
}

std::vector<std::string> split_labels(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string t; std::getline(in, t, ',');) {
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

// Polls until `done` or SIGINT/SIGTERM, which must be blocked already.
template <typename Done>
bool wait_or_signal(const sigset_t& set, Done done) {
  while (!done()) {
    timespec ts{0, 100'000'000};
    if (sigtimedwait(&set, nullptr, &ts) > 0) return false;
  }
  return true;
}

sigset_t block_termination() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
  return set;
}

void print_report(const sim::DeviceReport& r, bool as_json) {
  if (as_json) {
    std::cout << json{{"frames_sent", r.frames_sent},
                      {"frames_delivered", r.frames_delivered},
                      {"frames_dropped", r.frames_dropped},
                      {"frames_lost", r.frames_lost},
                      {"connections", r.connections},
                      {"outages", r.outages},
                      {"config", device::to_json(r.config)},
                      {"error", r.error ? json(*r.error) : json(nullptr)}}
                     .dump(2)
              << "\n";
    return;
  }
  std::cout << "frames sent " << r.frames_sent << ", delivered " << r.frames_delivered << ", dropped "
            << r.frames_dropped << ", lost " << r.frames_lost << "\n";
  if (r.error) std::cout << "device error: " << *r.error << "\n";
}

struct SimulateOptions {
  std::string profile = "muse-like";
  std::string profile_file;
  std::string scenario;
  int rate = 0;
  std::string channels;
  double duration = 10.0;
  double drop = 0.0;
  double latency = 0.0;
  double jitter = 0.0;
  std::vector<std::string> outages;
  std::string listen = "127.0.0.1:0";
  bool serve = false;
  bool fast = false;
  bool json = false;
  std::uint64_t seed = 0;
};

int run_simulate(const SimulateOptions& o, const CLI::App& sub) {
  sim::Scenario sc;
  if (!o.scenario.empty()) {
    sc = sim::load_scenario(o.scenario);
  } else {
    sc.profile = device::find_builtin_profile(o.profile);
    sc.signal = sim::default_signal_spec(o.seed);
    sc.faults.seed = o.seed;
  }
  if (!o.profile_file.empty()) {
    std::ifstream in(o.profile_file);
    if (!in) throw std::runtime_error("cannot read " + o.profile_file);
    sc.profile = device::profile_from_json(json::parse(in));
  } else if (sub.count("--profile") && !o.scenario.empty()) {
    sc.profile = device::find_builtin_profile(o.profile);
  }
  if (sub.count("--seed") && !o.scenario.empty()) {
    sc.signal.seed = o.seed;
    sc.faults.seed = o.seed;
  }
  if (sub.count("--drop")) sc.faults.drop_probability = o.drop;
  if (sub.count("--latency")) sc.faults.latency_ms = o.latency;
  if (sub.count("--jitter")) sc.faults.jitter_ms = o.jitter;
  for (const auto& t : o.outages) sc.faults.outages.push_back(parse_outage(t));
  if (o.fast) sc.pacing = sim::Pacing::kFast;

  device::DeviceConfig want = sc.config.value_or(device::DeviceConfig{});
  if (o.rate > 0) want.rate = o.rate;
  if (!o.channels.empty()) want.active_channels = split_labels(o.channels);
  const auto got = device::negotiate_config(want, sc.profile);

  sim::DeviceOptions opts;
  opts.endpoint = net::Endpoint::parse(o.listen);
  opts.pacing = sc.pacing;
  opts.config = want;
  const auto duration_ms = to_ms(o.duration);

  const auto signals = block_termination();
  sim::VirtualDevice dev(sc.profile, sc.signal, sc.faults, opts);
  dev.start();
  std::cout << "device " << sc.profile.name << " on " << dev.endpoint().to_string() << ", " << got.rate << " Hz, "
            << got.active_channels.size() << " channels\n";
  if (want.rate > 0 && want.rate != got.rate) {
    std::cout << "note: " << want.rate << " Hz is not supported by " << sc.profile.name << "; negotiated "
              << got.rate << " Hz\n";
  }
  std::cout.flush();

  bool interrupted = false;
  if (o.serve) {
    // An external host drives the stream.
    interrupted = !wait_or_signal(signals, [&] { return dev.finished(); });
  } else {
    recording::RecorderOptions ro;
    ro.duration_ms = duration_ms;
    ro.requested = want;
    ro.session.buffer_seconds = std::max(ro.session.buffer_seconds, o.duration + 10.0);
    recording::Recorder rec(dev.endpoint(), "simulate", "loopback", ro);
    rec.connect();
    rec.confirm_placement();
    rec.start();
    std::atomic<bool> finished{false};
    std::thread waiter([&] {
      rec.wait();
      finished = true;
    });
    interrupted = !wait_or_signal(signals, [&] { return finished.load(); });
    if (interrupted) rec.abort("interrupted");
    waiter.join();
  }
  if (!o.serve) dev.wait_for(std::chrono::milliseconds(static_cast<int>(opts.linger_s * 1000) + 1000));
  dev.stop();
  const auto report = dev.wait();
  print_report(report, o.json);
  if (interrupted) std::cerr << "interrupted\n";
  return kOk;
}

struct RecordOptions {
  std::string patient;
  std::string name;
  std::string sex = "X";
  std::string birthdate;
  std::string device;
  double duration = 60.0;
  std::string out;
  std::string format = "auto";
  int rate = 0;
  std::string channels;
  bool anonymize = false;
  std::string technician;
  bool quiet = false;
  std::uint64_t seed = 0;
};

int run_record(const RecordOptions& o) {
  codec::PatientIdentity who;
  who.code = o.patient;
  who.sex = o.sex[0];
  who.name = o.name;
  if (!o.birthdate.empty()) {
    who.birthdate = gateway::parse_date(o.birthdate);
    if (!who.birthdate) throw std::invalid_argument("--birthdate wants YYYY-MM-DD");
  }
  const auto endpoint = net::Endpoint::parse(o.device);

  std::vector<std::string> labels;
  std::mutex print_mu;
  recording::RecorderOptions ro;
  ro.duration_ms = to_ms(o.duration);
  if (o.rate > 0 || !o.channels.empty()) {
    device::DeviceConfig want;
    want.rate = o.rate;
    want.active_channels = split_labels(o.channels);
    ro.requested = want;
  }
  if (!o.quiet) {
    ro.on_quality = [&](const recording::QualityEvent& e) {
      std::lock_guard lock(print_mu);
      const auto j = recording::to_json(e, labels);
      std::cout << "  quality " << j.at("kind").get<std::string>() << " "
                << (j.at("channel").is_null() ? std::string("all") : j.at("channel").get<std::string>()) << " at "
                << e.onset << " s for " << e.duration << " s (" << j.at("severity").get<std::string>() << ")\n";
    };
    ro.on_state = [&](recording::SessionState s) {
      std::lock_guard lock(print_mu);
      std::cout << "  state " << recording::to_string(s) << "\n";
    };
  }
  char id[32];
  std::snprintf(id, sizeof id, "ses-%016llx", static_cast<unsigned long long>(sim::splitmix64(o.seed)));

  recording::Recorder rec(endpoint, id, o.patient, ro);
  auto session = rec.connect();
  labels = session->config().active_channels;
  std::cout << "connected to " << session->profile().name << " at " << endpoint.to_string() << ", "
            << session->config().rate << " Hz, " << labels.size() << " channels\n";
  // Headless run: the operator's placement check is taken as given.
  rec.confirm_placement();
  std::cout << "placement confirmed\n";

  const auto signals = block_termination();
  rec.start();
  std::atomic<bool> finished{false};
  recording::RecordingResult result;
  std::thread waiter([&] {
    result = rec.wait();
    finished = true;
  });
  if (!wait_or_signal(signals, [&] { return finished.load(); })) rec.abort("interrupted");
  waiter.join();

  if (session->state() != recording::SessionState::kFinalizing) {
    std::cerr << "recording aborted: " << session->abort_reason().value_or(result.error.value_or("unknown")) << "\n";
    return kRuntime;
  }
  recording::FinalizeOptions fo;
  fo.patient = who;
  fo.anonymize = o.anonymize;
  fo.technician = o.technician;
  if (o.format == "edf") fo.width = codec::SampleWidth::kEdf16;
  if (o.format == "bdf") fo.width = codec::SampleWidth::kBdf24;
  const auto out = recording::finalize_session(*session, fo);
  codec::write_file_bytes(o.out, out.bytes);

  const auto summary = session->summary();
  const auto events = session->quality_events();
  const auto gaps = session->gaps();
  double gap_s = 0.0;
  for (const auto& g : gaps) gap_s += g.duration;
  std::map<std::string, int> by_kind;
  for (const auto& e : events) ++by_kind[std::string(recording::to_string(e.kind))];

  std::cout << "wrote " << o.out << " (" << (out.model.header.width == codec::SampleWidth::kEdf16 ? "EDF+" : "BDF+")
            << ", " << out.model.records.size() << " records, " << summary.samples_per_channel
            << " samples per channel)\n";
  std::cout << "frames received " << summary.frames_received << ", missing " << summary.frames_missing
            << ", reconnects " << result.reconnects << "\n";
  std::cout << "gaps " << gaps.size() << " (" << gap_s << " s)\n";
  std::cout << "quality events " << events.size();
  for (const auto& [kind, n] : by_kind) std::cout << ", " << kind << " " << n;
  std::cout << "\n";
  return kOk;
}

}  // namespace

Command add_simulate(CLI::App& app) {
  auto o = std::make_shared<SimulateOptions>();
  auto* sub = app.add_subcommand("simulate", "Run a virtual EEG headset");
  sub->add_option("--profile", o->profile, "Built-in profile")
      ->check(CLI::IsMember({"muse-like", "biopot-like"}))
      ->capture_default_str();
  sub->add_option("--profile-file", o->profile_file, "Profile as JSON")->check(CLI::ExistingFile);
  sub->add_option("--scenario", o->scenario, "Scenario file (profile, config, signal, faults)")
      ->check(CLI::ExistingFile);
  sub->add_option("--rate", o->rate, "Requested sample rate, Hz");
  sub->add_option("--channels", o->channels, "Comma-separated electrode labels");
  sub->add_option("--duration", o->duration, "Seconds to stream with the built-in client")->capture_default_str();
  sub->add_option("--drop", o->drop, "Per-packet drop probability")->check(CLI::Range(0.0, 1.0));
  sub->add_option("--latency", o->latency, "Added delay, ms")->check(CLI::NonNegativeNumber);
  sub->add_option("--jitter", o->jitter, "Uniform extra delay, ms")->check(CLI::NonNegativeNumber);
  sub->add_option("--outage", o->outages, "Disconnect at AT s for DOWN s (AT:DOWN, repeatable)");
  sub->add_option("--listen", o->listen, "host:port, port 0 picks one")->capture_default_str();
  sub->add_flag("--serve", o->serve, "Wait for an external host instead of streaming to the built-in client");
  sub->add_flag("--fast", o->fast, "Send frames as fast as the client reads");
  sub->add_flag("--json", o->json, "Machine-readable report");
  add_seed(sub, o->seed);
  return {sub, [o, sub] { return run_simulate(*o, *sub); }};
}

Command add_record(CLI::App& app) {
  auto o = std::make_shared<RecordOptions>();
  auto* sub = app.add_subcommand("record", "Record a session from a device into an EDF+/BDF+ file");
  sub->add_option("--patient", o->patient, "Patient code")->required();
  sub->add_option("--name", o->name, "Patient name");
  sub->add_option("--sex", o->sex, "F, M or X")->check(CLI::IsMember({"F", "M", "X"}))->capture_default_str();
  sub->add_option("--birthdate", o->birthdate, "YYYY-MM-DD");
  sub->add_option("--device", o->device, "Device host:port")->required();
  sub->add_option("--duration", o->duration, "Seconds")->capture_default_str();
  sub->add_option("--out,-o", o->out, "Output file")->required();
  sub->add_option("--format", o->format, "auto picks EDF+ for devices of 16 bits or less")
      ->check(CLI::IsMember({"auto", "edf", "bdf"}))
      ->capture_default_str();
  sub->add_option("--rate", o->rate, "Requested sample rate, Hz");
  sub->add_option("--channels", o->channels, "Comma-separated electrode labels");
  sub->add_flag("--anonymize", o->anonymize, "Write X for the patient name");
  sub->add_option("--technician", o->technician);
  sub->add_flag("--quiet,-q", o->quiet, "Only print the summary");
  add_seed(sub, o->seed);
  return {sub, [o] { return run_record(*o); }};
}

}  // namespace eegcare::cli
