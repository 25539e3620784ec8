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

// score

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <memory>

#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "eegcare/screening/mchat.hpp"

namespace eegcare::cli {

namespace {

using nlohmann::json;

struct ScoreOptions {
  std::string questionnaire;
  std::string response;
  std::string stage;
  bool json = false;
  std::uint64_t seed = 0;
};

int run_score(const ScoreOptions& o) {
  const auto model = screening::load_questionnaire(o.questionnaire);
  std::ifstream in(o.response);
  if (!in) throw std::runtime_error("cannot read " + o.response);
  const auto doc = screening::response_from_json(json::parse(in));
  if (doc.questionnaire != model.canonical) {
    std::cerr << "error: response answers " << doc.questionnaire << ", not " << model.canonical << "\n";
    return kInvalid;
  }
  screening::RiskResult r;
  if (!o.stage.empty()) {
    r = screening::score_mchat(model, doc,
                               o.stage == "initial" ? screening::Stage::kInitial : screening::Stage::kFollowUp);
  } else {
    r = screening::score_mchat(model, doc);
  }
  if (o.json) {
    std::cout << screening::to_json(r).dump(2) << "\n";
    return kOk;
  }
  std::string tier(screening::to_string(r.tier));
  std::transform(tier.begin(), tier.end(), tier.begin(), [](unsigned char c) { return std::toupper(c); });
  std::cout << "score " << r.score << ", " << tier << ", " << screening::to_string(r.action) << "\n";
  return kOk;
}

}  // namespace

Command add_score(CLI::App& app) {
  auto o = std::make_shared<ScoreOptions>();
  auto* sub = app.add_subcommand("score", "Score a questionnaire response");
  sub->add_option("questionnaire", o->questionnaire, "Questionnaire JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("response", o->response, "QuestionnaireResponse JSON")->required()->check(CLI::ExistingFile);
  sub->add_option("--stage", o->stage, "Override the questionnaire's stage")
      ->check(CLI::IsMember({"initial", "follow-up"}));
  sub->add_flag("--json", o->json);
  add_seed(sub, o->seed);
  return {sub, [o] { return run_score(*o); }};
}

}  // namespace eegcare::cli
