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

// Two-stage M-CHAT-R/F scoring.
//
//   initial    0-2 low / rescreen-later, 3-7 medium / administer-follow-up,
//              8-20 high / refer
//   follow-up  >= 2 high / refer, else low / rescreen-later
//
// The follow-up questionnaire carries the initial outcome in items
// "initial-<id>" (true = failed); each "followup-<id>" item is enabled by its
// carry item.

#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegcare/screening/questionnaire.hpp"

namespace eegcare::screening {

enum class Tier { kLow, kMedium, kHigh };
enum class Action { kRescreenLater, kAdministerFollowUp, kRefer };

std::string_view to_string(Tier t);
std::string_view to_string(Action a);

struct RiskResult {
  Stage stage = Stage::kInitial;
  int score = 0;
  Tier tier = Tier::kLow;
  Action action = Action::kRescreenLater;

  bool operator==(const RiskResult&) const = default;
};

// Tier and action for a score.
RiskResult classify(Stage stage, int score);

bool is_at_risk(ScoringTag tag, const AnswerValue& value);

class ScoringError : public std::runtime_error {
 public:
  ScoringError(const std::string& what, std::vector<std::string> missing);
  std::vector<std::string> missing;  // link-ids
};

// Validates `response` first (ResponseError). Enabled items tagged
// at-risk-if-yes/no must be answered, else ScoringError lists them.
RiskResult score_mchat(const QuestionnaireModel& model, const ResponseDocument& response, Stage stage);
// Uses model.stage; throws ScoringError when the model has none.
RiskResult score_mchat(const QuestionnaireModel& model, const ResponseDocument& response);

// Carry answers for the follow-up questionnaire from a scored initial response.
Answers follow_up_carry(const QuestionnaireModel& initial, const ResponseDocument& response);

nlohmann::json to_json(const RiskResult& r);

}  // namespace eegcare::screening
