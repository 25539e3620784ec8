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

#include "eegcare/sim/faults.hpp"

#include <cmath>

namespace eegcare::sim {

std::optional<Outage> FaultModel::outage_at(double t) const {
  for (const auto& o : outages) {
    if (o.covers(t)) return o;
  }
  return std::nullopt;
}

void check_faults(const FaultModel& f) {
  if (!(f.drop_probability >= 0.0 && f.drop_probability <= 1.0)) {
    throw FaultError("drop probability must be in [0, 1]");
  }
  if (!(f.latency_ms >= 0.0) || !(f.jitter_ms >= 0.0) || !std::isfinite(f.latency_ms) ||
      !std::isfinite(f.jitter_ms)) {
    throw FaultError("latency and jitter must be finite and >= 0");
  }
  for (const auto& o : f.outages) {
    if (!(o.at_s >= 0.0) || !(o.down_s >= 0.0) || !std::isfinite(o.at_s) || !std::isfinite(o.down_s)) {
      throw FaultError("outage times must be finite and >= 0");
    }
  }
}

nlohmann::json to_json(const FaultModel& f) {
  nlohmann::json outages = nlohmann::json::array();
  for (const auto& o : f.outages) outages.push_back({{"at", o.at_s}, {"down", o.down_s}});
  return {{"drop", f.drop_probability},
          {"latency_ms", f.latency_ms},
          {"jitter_ms", f.jitter_ms},
          {"outages", outages},
          {"seed", f.seed}};
}

FaultModel faults_from_json(const nlohmann::json& j) {
  FaultModel f;
  f.drop_probability = j.value("drop", 0.0);
  f.latency_ms = j.value("latency_ms", 0.0);
  f.jitter_ms = j.value("jitter_ms", 0.0);
  f.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("outages")) {
    for (const auto& o : j.at("outages")) f.outages.push_back({o.at("at").get<double>(), o.at("down").get<double>()});
  }
  check_faults(f);
  return f;
}

}  // namespace eegcare::sim
