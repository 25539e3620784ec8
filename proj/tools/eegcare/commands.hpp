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

#include <CLI11.hpp>

#include <cstdint>
#include <functional>
#include <vector>

namespace eegcare::cli {

// Exit status contract.
enum Exit : int {
  kOk = 0,
  kInvalid = 1,  // validation failure: bad file, bad response, rejected upload
  kUsage = 2,
  kRuntime = 3,  // device, network or I/O failure
};

struct Command {
  CLI::App* app = nullptr;
  std::function<int()> run;
};

// Every subcommand takes --seed.
inline void add_seed(CLI::App* app, std::uint64_t& seed) {
  app->add_option("--seed", seed, "Seed for every random choice")->capture_default_str();
}

Command add_inspect(CLI::App& app);
Command add_convert(CLI::App& app);
Command add_simulate(CLI::App& app);
Command add_record(CLI::App& app);
Command add_score(CLI::App& app);
Command add_serve(CLI::App& app);
Command add_upload(CLI::App& app);

}  // namespace eegcare::cli
