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

#include "eegcare/sim/scenario.hpp"

#include <fstream>

namespace eegcare::sim {

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  const auto& p = j.at("profile");
  s.profile = p.is_string() ? device::find_builtin_profile(p.get<std::string>()) : device::profile_from_json(p);
  if (j.contains("config")) s.config = device::config_from_json(j.at("config"));
  s.signal = j.contains("signal") ? signal_spec_from_json(j.at("signal")) : default_signal_spec();
  if (j.contains("faults")) s.faults = faults_from_json(j.at("faults"));
  const auto pacing = j.value("pacing", std::string("realtime"));
  if (pacing == "fast") {
    s.pacing = Pacing::kFast;
  } else if (pacing != "realtime") {
    throw std::invalid_argument("pacing must be 'realtime' or 'fast'");
  }
  return s;
}

nlohmann::json to_json(const Scenario& s) {
  nlohmann::json j{{"profile", device::to_json(s.profile)},
                   {"signal", to_json(s.signal)},
                   {"faults", to_json(s.faults)},
                   {"pacing", s.pacing == Pacing::kFast ? "fast" : "realtime"}};
  if (s.config) j["config"] = device::to_json(*s.config);
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario " + path.string());
  return scenario_from_json(nlohmann::json::parse(in));
}

}  // namespace eegcare::sim
