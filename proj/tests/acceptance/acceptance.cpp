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

// Release acceptance checks. Prints one PASS or FAIL line per criterion and
// exits non-zero if any fails.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "eegcare/codec/calibration.hpp"
#include "eegcare/codec/codec.hpp"
#include "eegcare/device/gaps.hpp"
#include "eegcare/device/profile.hpp"
#include "eegcare/gateway/blob_store.hpp"
#include "eegcare/gateway/server.hpp"
#include "eegcare/recording/finalize.hpp"
#include "eegcare/recording/recorder.hpp"
#include "eegcare/screening/mchat.hpp"
#include "eegcare/sim/virtual_device.hpp"
#include "support/finalized_fixture.hpp"
#include "support/random_model.hpp"

namespace {

using namespace eegcare;
using nlohmann::json;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

// --- helpers ----------------------------------------------------------------

std::string field(const codec::Bytes& b, std::size_t off, std::size_t len) {
  std::string s(b.begin() + static_cast<std::ptrdiff_t>(off), b.begin() + static_cast<std::ptrdiff_t>(off + len));
  while (!s.empty() && s.back() == ' ') s.pop_back();
  return s;
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string run_capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (p == nullptr) {
    status = -1;
    return out;
  }
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, p)) > 0;) out.append(buf, n);
  status = ::pclose(p);
  return out;
}

// --- criteria ---------------------------------------------------------------

Outcome codec_round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1000);
  int mismatches = 0, header_errors = 0, plus = 0;
  while (plus < 1000) {
    const auto m = testing::random_model(rng);
    if (!m.has_annotation_signal()) continue;
    ++plus;
    const auto bytes = codec::encode_file(m);
    // Header length straight from the bytes: 256 x (ns + 1).
    const long ns = std::stol(field(bytes, 252, 4));
    const long header_bytes = std::stol(field(bytes, 184, 8));
    const long expected_ns = static_cast<long>(m.signals.size()) + (m.has_annotation_signal() ? 1 : 0);
    if (header_bytes != 256 * (ns + 1) || ns != expected_ns) ++header_errors;
    if (!(codec::decode_file(bytes) == m)) ++mismatches;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::ostringstream d;
  d << plus << " EDF+/BDF+ models, " << mismatches << " mismatches, " << header_errors
    << " header-length errors, " << secs << " s";
  return {mismatches == 0 && header_errors == 0 && secs < 60.0, d.str()};
}

Outcome interop() {
  const fs::path dir = fs::path(EEGCARE_FIXTURE_DIR) / "finalized";
  int status = 0;
  run_capture("python3 -c 'import pyedflib' 2>/dev/null", status);
  const bool live = status == 0;
  const auto tmp = fs::temp_directory_path() / ("eegcare-interop-" + gateway::random_hex(4));
  fs::create_directories(tmp);
  std::vector<std::string> problems;
  for (const auto& f : testing::finalized_fixtures()) {
    const auto bytes = testing::finalize_fixture(f).bytes;
    if (codec::read_file_bytes((dir / f.name).string()) != bytes) {
      problems.push_back(f.name + ": finalize_session output differs from the committed fixture");
    }
    const auto seen = read_json(dir / (f.name + ".pyedflib.json"));
    // Oracle: channel count and rate from the device config, duration from
    // the frames sent, padded up to whole 1-s records.
    const auto layout = device::FrameLayout::of(f.config, f.profile);
    const std::uint64_t samples = f.frames * static_cast<std::uint64_t>(layout.samples_per_packet);
    const std::uint64_t rate = static_cast<std::uint64_t>(f.config.rate);
    const std::uint64_t records = (samples + rate - 1) / rate;
    bool ok = seen.at("channels") == f.config.active_channels.size() &&
              seen.at("labels") == json(f.config.active_channels) &&
              seen.at("duration_s").get<double>() == static_cast<double>(records);
    for (const auto& r : seen.at("rates")) ok &= r.get<double>() == static_cast<double>(rate);
    for (const auto& n : seen.at("samples")) ok &= n.get<std::uint64_t>() == records * rate;
    // The reader sees one GAP per run of skipped frames, at the right place.
    std::vector<std::pair<double, double>> runs;
    for (auto it = f.skipped.begin(); it != f.skipped.end();) {
      auto first = *it, last = *it;
      while (++it != f.skipped.end() && *it == last + 1) last = *it;
      const double spp = layout.samples_per_packet;
      runs.emplace_back(first * spp / rate, (last - first + 1) * spp / rate);
    }
    std::vector<std::pair<double, double>> gaps;
    for (const auto& a : seen.at("annotations")) {
      if (a.at("text") == "GAP") gaps.emplace_back(a.at("onset").get<double>(), a.at("duration").get<double>());
    }
    ok &= gaps.size() == runs.size();
    for (std::size_t i = 0; ok && i < gaps.size(); ++i) {
      ok &= std::abs(gaps[i].first - runs[i].first) < 1e-6 && std::abs(gaps[i].second - runs[i].second) < 1e-6;
    }
    if (!ok) problems.push_back(f.name + ": pyedflib view does not match channels/rate/duration/gaps");
    if (live) {
      const auto path = tmp / f.name;
      codec::write_file_bytes(path.string(), bytes);
      const auto out = run_capture("python3 '" EEGCARE_FIXTURE_DIR "/read_finalized.py' '" + path.string() + "'",
                                   status);
      if (status != 0 || json::parse(out, nullptr, false) != seen) {
        problems.push_back(f.name + ": live pyedflib read differs from the fixture sidecar");
      }
    }
  }
  fs::remove_all(tmp);
  std::string d = "2 fixtures (EDF+ muse-like, BDF+ biopot-like) read by pyedflib";
  d += live ? ", live re-read" : ", fixture sidecars only (pyedflib not installed)";
  for (const auto& p : problems) d += "; " + p;
  return {problems.empty(), d};
}

Outcome table_one() {
  const auto& b = device::builtin_profiles();
  const auto& m = b.muse_like;
  const auto& p = b.biopot_like;
  const bool muse = m.channel_count == 4 && m.electrode_labels == std::vector<std::string>{"TP9", "AF7", "AF9", "TP10"} &&
                    m.supported_rates == std::vector<int>{256} && m.resolution_bits == 12;
  const bool biopot = p.channel_count == 8 && p.electrode_labels.size() == 8 &&
                      p.supported_rates == std::vector<int>{250, 500, 1000, 2000} && p.resolution_bits == 24;
  std::ostringstream d;
  d << "muse-like " << m.channel_count << "ch/" << m.max_rate() << " Hz/" << m.resolution_bits << "-bit, biopot-like "
    << p.channel_count << "ch/{";
  for (std::size_t i = 0; i < p.supported_rates.size(); ++i) d << (i ? "," : "") << p.supported_rates[i];
  d << "} Hz/" << p.resolution_bits << "-bit";
  return {muse && biopot, d.str()};
}

struct RecordRun {
  sim::DeviceReport device;
  recording::RecordingResult result;
  std::shared_ptr<recording::RecordingSession> session;
};

RecordRun record(const sim::FaultModel& faults, std::uint32_t duration_ms) {
  const auto& muse = device::builtin_profiles().muse_like;
  sim::DeviceOptions d;
  d.pacing = sim::Pacing::kFast;
  auto dev = sim::run_virtual_device(muse, sim::default_signal_spec(faults.seed), faults, d);
  recording::RecorderOptions o;
  o.duration_ms = duration_ms;
  recording::Recorder rec(dev->endpoint(), "acceptance", "MCH-0001", o);
  auto s = rec.connect();
  rec.confirm_placement();
  rec.start();
  RecordRun r{{}, rec.wait(), s};
  r.device = dev->wait();
  return r;
}

Outcome conservation() {
  std::ostringstream d;
  bool ok = true;
  // Fault-free minute.
  {
    auto r = record({}, 60000);
    const auto m = codec::decode_file(recording::finalize_session(*r.session).bytes);
    std::size_t samples = 0;
    for (const auto& rec : m.records) samples += rec[0].size();
    bool fill = false;
    for (const auto& a : m.annotations) fill |= a.texts.at(0) == "GAP" || a.texts.at(0) == "PAD";
    ok &= samples == 15360 && !fill && r.device.frames_sent == 1280;
    d << "fault-free 60 s: " << samples << " samples/channel";
  }
  // Seeded drops and outages.
  const double frame_s = 12.0 / 256.0;
  int runs = 0;
  for (std::uint64_t seed : {5u, 17u, 42u}) {
    sim::FaultModel f;
    f.seed = seed;
    f.drop_probability = 0.02 * static_cast<double>(seed % 4 + 1);
    f.outages = {{2.0 + static_cast<double>(seed % 3), 0.3}};
    auto r = record(f, 12000);
    if (r.result.error) {
      ok = false;
      d << "; seed " << seed << ": " << *r.result.error;
      continue;
    }
    const auto m = codec::decode_file(recording::finalize_session(*r.session).bytes);
    const auto faulted = r.device.frames_dropped + r.device.frames_lost;
    double gap_s = 0.0, pad_s = 0.0;
    for (const auto& a : m.annotations) {
      if (a.texts.at(0) == "GAP") gap_s += *a.duration;
      if (a.texts.at(0) == "PAD") pad_s += *a.duration;
    }
    std::size_t total = 0;
    for (const auto& rec : m.records) total += rec[0].size();
    const double real_samples = static_cast<double>(total) - (gap_s + pad_s) * 256.0;
    const double sent_s = static_cast<double>(r.device.frames_sent) * frame_s;
    const bool exact = std::llround(real_samples) == static_cast<long long>((r.device.frames_sent - faulted) * 12) &&
                       r.session->summary().frames_missing == faulted;
    const bool balance = std::abs(real_samples / 256.0 + gap_s - sent_s) <= frame_s;
    ok &= exact && balance && faulted > 0;
    ++runs;
    d << "; seed " << seed << ": sent " << r.device.frames_sent << ", faulted " << faulted << ", gaps "
      << gap_s << " s";
  }
  return {ok && runs == 3, d.str()};
}

Outcome wraparound() {
  std::mt19937_64 rng(65536);
  int trials = 0, wrong = 0;
  for (; trials < 30; ++trials) {
    const std::uint64_t start = rng() % 65536;
    const std::uint64_t total = 65536 * 3 + 1 + rng() % 20000;  // >= 3 wraps
    const double p = 0.002 * static_cast<double>(trials % 10);
    std::bernoulli_distribution lose(p), burst(0.0005);
    std::vector<std::uint16_t> seq;
    std::uint64_t first = 0, last = 0;
    for (std::uint64_t k = 0; k < total; ++k) {
      if (k != 0 && k + 1 != total) {
        if (burst(rng)) {
          k += rng() % 3000;  // burst shorter than one wrap
          continue;
        }
        if (lose(rng)) continue;
      }
      if (k >= total) break;
      if (seq.empty()) first = k;
      last = k;
      seq.push_back(static_cast<std::uint16_t>((start + k) & 0xFFFF));
    }
    // Oracle: stream positions spanned minus packets seen.
    const std::uint64_t expected = (last - first + 1) - seq.size();
    std::uint64_t reported = 0;
    for (const auto& g : device::detect_gaps(seq)) reported += g.missing;
    device::SequenceTracker t;
    std::uint64_t tracked = 0;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto step = t.observe(seq[i]);
      if (i > 0) tracked += step.missing;
    }
    wrong += reported != expected || tracked != expected;
  }
  std::ostringstream d;
  d << trials << " loss patterns over >= 3 wraps, " << wrong << " miscounted";
  return {wrong == 0, d.str()};
}

// Counting oracle on the raw questionnaire JSON.
struct RawItem {
  std::string id;
  std::string tag;
};

std::vector<RawItem> raw_items(const json& q) {
  std::vector<RawItem> out;
  for (const auto& item : q.at("item")) {
    RawItem r{item.at("linkId").get<std::string>(), ""};
    for (const auto& e : item.value("extension", json::array())) {
      if (e.at("url") == "urn:eegcare:scoring-tag") r.tag = e.at("valueCode").get<std::string>();
    }
    out.push_back(r);
  }
  return out;
}

int oracle_score(const std::vector<RawItem>& items, const std::vector<bool>& yes) {
  int n = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].tag == "at-risk-if-yes" && yes[i]) ++n;
    if (items[i].tag == "at-risk-if-no" && !yes[i]) ++n;
  }
  return n;
}

Outcome mchat() {
  const fs::path path = fs::path(EEGCARE_DATA_DIR) / "questionnaires" / "mchat-rf-initial.json";
  const auto raw = read_json(path);
  const auto items = raw_items(raw);
  const auto model = screening::load_questionnaire(path);
  bool ok = items.size() == 20;

  // Exhaustive tier table.
  int tier_errors = 0;
  for (int s = 0; s <= 20; ++s) {
    const auto r = screening::classify(screening::Stage::kInitial, s);
    const auto want = s <= 2 ? screening::Tier::kLow : (s <= 7 ? screening::Tier::kMedium : screening::Tier::kHigh);
    tier_errors += r.tier != want;
  }

  auto score = [&](const std::vector<bool>& yes) {
    screening::Answers a;
    for (std::size_t i = 0; i < items.size(); ++i) a[items[i].id] = static_cast<bool>(yes[i]);
    const auto doc = screening::build_response(model, a, "Patient/MCH-0001",
                                               std::chrono::sys_days(std::chrono::year{2026} / 3 / 2));
    return screening::score_mchat(model, doc);
  };

  std::mt19937_64 rng(10000);
  std::bernoulli_distribution coin(0.5);
  int mismatches = 0, monotonic_violations = 0;
  for (int i = 0; i < 10000; ++i) {
    std::vector<bool> yes(items.size());
    for (std::size_t k = 0; k < yes.size(); ++k) yes[k] = coin(rng);
    const auto r = score(yes);
    const int expected = oracle_score(items, yes);
    mismatches += r.score != expected;
    // Flipping one answer toward risk never lowers score or tier.
    if (i % 10 == 0) {
      for (std::size_t k = 0; k < yes.size(); ++k) {
        const bool risky = items[k].tag == "at-risk-if-yes" ? yes[k] : !yes[k];
        if (risky || items[k].tag.empty() || items[k].tag == "pass") continue;
        auto worse = yes;
        worse[k] = !worse[k];
        const auto w = score(worse);
        monotonic_violations += w.score != r.score + 1 || w.tier < r.tier;
      }
    }
  }
  ok &= tier_errors == 0 && mismatches == 0 && monotonic_violations == 0;
  std::ostringstream d;
  d << "tiers 0-20: " << tier_errors << " errors; 10000 random vectors: " << mismatches
    << " mismatches; monotonicity violations: " << monotonic_violations;
  return {ok, d.str()};
}

// Two signals: a sine of amplitude `amp` uV and frequency `freq`, and zero.
codec::SignalFileModel sine_recording(double amp, double freq, int rate, int seconds) {
  codec::SignalFileModel m;
  m.header.width = codec::SampleWidth::kBdf24;
  m.header.patient_id = "MCH-0001 X X X";
  m.header.recording_id = "Startdate 02-MAR-2026 X X synthetic";
  m.header.start_date = "02.03.26";
  m.header.start_time = "09.00.00";
  m.header.record_count = seconds;
  for (const char* label : {"Sine", "Zero"}) {
    codec::SignalHeader s;
    s.label = label;
    s.physical_dimension = "uV";
    s.physical_min = -1000;
    s.physical_max = 1000;
    s.digital_min = -8388607;
    s.digital_max = 8388607;
    s.samples_per_record = rate;
    m.signals.push_back(s);
  }
  const auto cal = codec::Calibration::of(m.signals[0]);
  for (int r = 0; r < seconds; ++r) {
    codec::DataRecord rec(2, std::vector<std::int32_t>(static_cast<std::size_t>(rate)));
    for (int i = 0; i < rate; ++i) {
      const double t = r + static_cast<double>(i) / rate;
      rec[0][static_cast<std::size_t>(i)] = codec::phys_to_dig(amp * std::sin(2 * M_PI * freq * t), cal).value;
      rec[1][static_cast<std::size_t>(i)] = codec::phys_to_dig(0.0, cal).value;
    }
    m.records.push_back(rec);
  }
  return m;
}

Outcome gateway_integrity() {
  const auto dir = fs::temp_directory_path() / ("eegcare-accept-" + gateway::random_hex(4));
  gateway::GatewayConfig c;
  c.data_dir = dir;
  c.questionnaire_dir = fs::path(EEGCARE_DATA_DIR) / "questionnaires";
  c.providers = {{"dr-lee", "secret-lee"}};
  gateway::Gateway gw(c);
  const int port = gw.start();
  httplib::Client cli("127.0.0.1", port);
  cli.set_bearer_token_auth("secret-lee");
  cli.Post("/patients", R"({"id":"MCH-0001","name":"Lee Leland","sex":"F","birth_date":"2022-08-02"})", "application/json");

  // Upload and download.
  std::mt19937_64 rng(100);
  int identical = 0;
  for (int i = 0; i < 100; ++i) {
    auto m = testing::random_model(rng);
    m.header.record_count = static_cast<std::int64_t>(m.records.size());
    const auto bytes = codec::encode_file(m);
    const std::string body(bytes.begin(), bytes.end());
    auto up = cli.Post("/patients/MCH-0001/recordings", body, "application/octet-stream");
    if (!up || up->status != 201) continue;
    const auto id = json::parse(up->body).at("id").get<std::string>();
    auto down = cli.Get("/recordings/" + id);
    identical += down && down->status == 200 && down->body == body;
  }

  // Authentication on every data route.
  int routes = 0, rejected = 0;
  for (const auto& r : gateway::Gateway::routes()) {
    if (!r.requires_auth) continue;
    std::string path = r.pattern;
    for (const auto& [param, value] : {std::pair<std::string, std::string>{":analyzer", "channel-stats"},
                                       {":id", "MCH-0001"}}) {
      for (auto pos = path.find(param); pos != std::string::npos; pos = path.find(param)) {
        path.replace(pos, param.size(), value);
      }
    }
    for (const std::string header : {std::string(), std::string("Bearer not-a-token")}) {
      httplib::Request req;
      req.method = r.method;
      req.path = path;
      if (!header.empty()) req.set_header("Authorization", header);
      if (r.method == "POST" || r.method == "PATCH") {
        req.body = "{}";
        req.set_header("Content-Type", "application/json");
      }
      httplib::Client anon("127.0.0.1", port);
      auto res = anon.send(req);
      ++routes;
      rejected += res && res->status == 401 && res->get_header_value("WWW-Authenticate").rfind("Bearer", 0) == 0;
    }
  }

  // Channel-stats RMS of synthetic sines against A / sqrt(2).
  int sines = 0, sines_ok = 0;
  double worst = 0.0;
  for (const double amp : {10.0, 100.0, 500.0}) {
    for (const double freq : {1.0, 10.0, 40.0}) {
      const auto bytes = codec::encode_file(sine_recording(amp, freq, 250, 4));
      auto up = cli.Post("/patients/MCH-0001/recordings", std::string(bytes.begin(), bytes.end()),
                         "application/octet-stream");
      ++sines;
      if (!up || up->status != 201) continue;
      const auto id = json::parse(up->body).at("id").get<std::string>();
      auto rep = cli.Post("/recordings/" + id + "/analyses/channel-stats", "{}", "application/json");
      if (!rep || rep->status != 201) continue;
      const auto ch = json::parse(rep->body).at("channels");
      const double rms = ch[0].at("results").at("rms").at("value");
      const double zero = ch[1].at("results").at("rms").at("value");
      const double expected = amp / std::sqrt(2.0);
      const double rel = std::abs(rms - expected) / expected;
      worst = std::max(worst, rel);
      sines_ok += rel <= 0.01 && zero == 0.0;
    }
  }
  gw.stop();
  fs::remove_all(dir);
  std::ostringstream d;
  d << identical << "/100 byte-identical round trips; " << rejected << "/" << routes
    << " unauthenticated calls rejected; " << sines_ok << "/" << sines << " sine RMS within 1% (worst "
    << worst * 100 << "%)";
  return {identical == 100 && rejected == routes && routes > 0 && sines_ok == sines, d.str()};
}

Outcome calibration() {
  const std::vector<codec::Calibration> cals = {
      device::builtin_profiles().muse_like.calibration(),
      {-1000.0, 1000.0, -2048, 2047},
      {-187.5, 1023.25, -2048, 2047},
      {0.1, 0.3, -2048, 2047},
      {500.0, -500.0, -2048, 2047},  // inverted
  };
  int checked = 0, endpoint_errors = 0, inverse_errors = 0;
  for (const auto& cal : cals) {
    endpoint_errors += codec::dig_to_phys(cal.digital_min, cal).value != cal.physical_min;
    endpoint_errors += codec::dig_to_phys(cal.digital_max, cal).value != cal.physical_max;
    for (std::int32_t d = -2048; d <= 2047; ++d) {
      ++checked;
      inverse_errors += codec::phys_to_dig(codec::dig_to_phys(d, cal).value, cal).value != d;
    }
  }
  std::ostringstream d;
  d << cals.size() << " calibrations x 4096 values: " << endpoint_errors << " endpoint errors, " << inverse_errors
    << " inverse errors";
  return {endpoint_errors == 0 && inverse_errors == 0 && checked == 4096 * static_cast<int>(cals.size()), d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"codec round trip", codec_round_trip},
      {"third-party interop", interop},
      {"device profile fidelity", table_one},
      {"end-to-end conservation", conservation},
      {"wraparound gap detection", wraparound},
      {"M-CHAT scoring", mchat},
      {"gateway integrity", gateway_integrity},
      {"calibration", calibration},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
