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

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

namespace eegcare::sim {

struct Outage {
  double at_s = 0.0;    // stream time of the disconnect
  double down_s = 0.0;  // how long the device stays away

  bool operator==(const Outage&) const = default;
  bool covers(double t) const { return t >= at_s && t < at_s + down_s; }
};

struct FaultModel {
  double drop_probability = 0.0;  // per packet
  double latency_ms = 0.0;
  double jitter_ms = 0.0;  // uniform in [0, jitter)
  std::vector<Outage> outages;
  std::uint64_t seed = 0;

  bool operator==(const FaultModel&) const = default;
  bool none() const {
    return drop_probability == 0.0 && latency_ms == 0.0 && jitter_ms == 0.0 && outages.empty();
  }
  // Outage whose window contains stream time t, if any.
  std::optional<Outage> outage_at(double t) const;
};

class FaultError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

void check_faults(const FaultModel& faults);

nlohmann::json to_json(const FaultModel& faults);
FaultModel faults_from_json(const nlohmann::json& j);

}  // namespace eegcare::sim
