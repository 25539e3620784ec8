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

#include "eegcare/screening/mchat.hpp"

namespace eegcare::screening {

std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::kLow:
      return "low";
    case Tier::kMedium:
      return "medium";
    case Tier::kHigh:
      return "high";
  }
  return "?";
}

std::string_view to_string(Action a) {
  switch (a) {
    case Action::kRescreenLater:
      return "rescreen-later";
    case Action::kAdministerFollowUp:
      return "administer-follow-up";
    case Action::kRefer:
      return "refer";
  }
  return "?";
}

RiskResult classify(Stage stage, int score) {
  RiskResult r{stage, score, Tier::kLow, Action::kRescreenLater};
  if (stage == Stage::kInitial) {
    if (score >= 8) {
      r.tier = Tier::kHigh;
      r.action = Action::kRefer;
    } else if (score >= 3) {
      r.tier = Tier::kMedium;
      r.action = Action::kAdministerFollowUp;
    }
  } else if (score >= 2) {
    r.tier = Tier::kHigh;
    r.action = Action::kRefer;
  }
  return r;
}

bool is_at_risk(ScoringTag tag, const AnswerValue& value) {
  const bool* yes = std::get_if<bool>(&value);
  if (!yes) return false;
  return (tag == ScoringTag::kAtRiskIfYes && *yes) || (tag == ScoringTag::kAtRiskIfNo && !*yes);
}

namespace {

bool scored(ScoringTag t) { return t == ScoringTag::kAtRiskIfYes || t == ScoringTag::kAtRiskIfNo; }

std::string missing_message(const std::vector<std::string>& ids) {
  std::string s = "incomplete response, missing:";
  for (const auto& id : ids) s += " " + id;
  return s;
}

}  // namespace

ScoringError::ScoringError(const std::string& what, std::vector<std::string> m)
    : std::runtime_error(what), missing(std::move(m)) {}

RiskResult score_mchat(const QuestionnaireModel& model, const ResponseDocument& response, Stage stage) {
  auto problems = validate_response(model, response);
  if (!problems.empty()) throw ResponseError("invalid response", std::move(problems));
  const Answers answers = response.answer_map();
  std::vector<std::string> missing;
  int score = 0;
  for (const auto& item : model.items) {
    if (!scored(item.scoring)) continue;
    auto it = answers.find(item.link_id);
    if (it == answers.end()) {
      if (is_enabled(item, answers)) missing.push_back(item.link_id);
      continue;
    }
    if (is_at_risk(item.scoring, it->second)) ++score;
  }
  if (!missing.empty()) {
    auto what = missing_message(missing);
    throw ScoringError(what, std::move(missing));
  }
  return classify(stage, score);
}

RiskResult score_mchat(const QuestionnaireModel& model, const ResponseDocument& response) {
  if (!model.stage) throw ScoringError("questionnaire " + model.canonical + " has no screening stage", {});
  return score_mchat(model, response, *model.stage);
}

Answers follow_up_carry(const QuestionnaireModel& initial, const ResponseDocument& response) {
  score_mchat(initial, response, Stage::kInitial);  // validates and checks completeness
  const Answers answers = response.answer_map();
  Answers carry;
  for (const auto& item : initial.items) {
    if (!scored(item.scoring)) continue;
    auto it = answers.find(item.link_id);
    carry["initial-" + item.link_id] = it != answers.end() && is_at_risk(item.scoring, it->second);
  }
  return carry;
}

nlohmann::json to_json(const RiskResult& r) {
  return {{"stage", to_string(r.stage)},
          {"score", r.score},
          {"tier", to_string(r.tier)},
          {"action", to_string(r.action)}};
}

}  // namespace eegcare::screening
