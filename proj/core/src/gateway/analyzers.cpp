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

#include "eegcare/gateway/analyzers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eegcare/codec/calibration.hpp"

namespace eegcare::gateway {

std::vector<ChannelResult> ChannelStatsAnalyzer::run(const codec::SignalFileModel& file) const {
  // Spans of fill, in seconds.
  std::vector<std::pair<double, double>> fill;
  for (const auto& a : file.annotations) {
    if (a.texts.empty() || !a.duration) continue;
    if (a.texts[0] == "GAP" || a.texts[0] == "PAD") fill.emplace_back(a.onset, a.onset + *a.duration);
  }
  auto is_fill = [&](double t) {
    for (const auto& [b, e] : fill) {
      if (t >= b - 1e-9 && t < e - 1e-9) return true;
    }
    return false;
  };

  std::vector<ChannelResult> out;
  for (std::size_t c = 0; c < file.signals.size(); ++c) {
    const auto& s = file.signals[c];
    const auto cal = codec::Calibration::of(s);
    double sum = 0.0, sumsq = 0.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::uint64_t n = 0;
    const double dt = file.header.record_duration / s.samples_per_record;
    for (std::size_t r = 0; r < file.records.size(); ++r) {
      const double t0 = file.record_start(r);
      const auto& samples = file.records[r][c];
      for (std::size_t i = 0; i < samples.size(); ++i) {
        if (!fill.empty() && is_fill(t0 + static_cast<double>(i) * dt)) continue;
        const double v = codec::dig_to_phys(samples[i], cal).value;
        sum += v;
        sumsq += v * v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        ++n;
      }
    }
    ChannelResult res{s.label, {}};
    const auto& u = s.physical_dimension;
    if (n == 0) {
      res.values["samples"] = {0.0, ""};
    } else {
      const double dn = static_cast<double>(n);
      res.values["mean"] = {sum / dn, u};
      res.values["rms"] = {std::sqrt(sumsq / dn), u};
      res.values["min"] = {lo, u};
      res.values["max"] = {hi, u};
      res.values["samples"] = {dn, ""};
    }
    out.push_back(std::move(res));
  }
  return out;
}

void AnalyzerRegistry::add(std::unique_ptr<Analyzer> a) {
  auto id = a->id();
  analyzers_[id] = std::move(a);
}

const Analyzer* AnalyzerRegistry::find(const std::string& id) const {
  auto it = analyzers_.find(id);
  return it == analyzers_.end() ? nullptr : it->second.get();
}

std::vector<const Analyzer*> AnalyzerRegistry::list() const {
  std::vector<const Analyzer*> out;
  for (const auto& [id, a] : analyzers_) out.push_back(a.get());
  return out;
}

AnalyzerRegistry AnalyzerRegistry::with_defaults() {
  AnalyzerRegistry r;
  r.add(std::make_unique<ChannelStatsAnalyzer>());
  return r;
}

nlohmann::json to_json(const std::vector<ChannelResult>& results) {
  auto out = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json values = nlohmann::json::object();
    for (const auto& [name, m] : r.values) values[name] = {{"value", m.value}, {"units", m.units}};
    out.push_back({{"name", r.channel}, {"results", values}});
  }
  return out;
}

}  // namespace eegcare::gateway
