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

// Scenario files bundle a profile, configuration, stimulus and faults:
//
//   {
//     "profile": "muse-like",            // or an inline profile object
//     "config": {"rate": 256},
//     "signal": {"seed": 1, "components": [...]},
//     "faults": {"drop": 0.0, "outages": [{"at": 1.0, "down": 0.5}]},
//     "pacing": "realtime"                // or "fast"
//   }

#pragma once

#include <filesystem>
#include <optional>

#include <nlohmann/json.hpp>

#include "eegcare/device/profile.hpp"
#include "eegcare/sim/faults.hpp"
#include "eegcare/sim/signal.hpp"
#include "eegcare/sim/virtual_device.hpp"

namespace eegcare::sim {

struct Scenario {
  device::PeripheralProfile profile;
  std::optional<device::DeviceConfig> config;
  SignalSpec signal;
  FaultModel faults;
  Pacing pacing = Pacing::kRealtime;
};

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& s);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace eegcare::sim
