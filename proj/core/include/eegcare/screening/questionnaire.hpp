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

// A small subset of FHIR Questionnaire / QuestionnaireResponse: flat lists of
// boolean and choice items gated by enableWhen ('=' only, all clauses must
// match). Scoring tags ride in an item extension:
//
//   {"url": "urn:eegcare:scoring-tag", "valueCode": "at-risk-if-no"}

#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace eegcare::screening {

inline constexpr const char* kScoringTagUrl = "urn:eegcare:scoring-tag";
inline constexpr const char* kStageUrl = "urn:eegcare:screening-stage";

enum class ItemType { kBoolean, kChoice };
enum class ScoringTag { kNone, kPass, kAtRiskIfYes, kAtRiskIfNo };
enum class Stage { kInitial, kFollowUp };

std::string_view to_string(ItemType t);
std::string_view to_string(ScoringTag t);
std::string_view to_string(Stage s);

// bool for boolean items, the option code for choice items.
using AnswerValue = std::variant<bool, std::string>;
using Answers = std::map<std::string, AnswerValue>;

std::string to_string(const AnswerValue& v);

struct AnswerOption {
  std::string code;
  std::string display;

  bool operator==(const AnswerOption&) const = default;
};

struct EnableWhen {
  std::string question;  // source link-id
  AnswerValue answer;

  bool operator==(const EnableWhen&) const = default;
};

struct Item {
  std::string link_id;
  std::string text;
  ItemType type = ItemType::kBoolean;
  std::vector<AnswerOption> options;  // choice items only
  std::vector<EnableWhen> enable_when;
  ScoringTag scoring = ScoringTag::kNone;

  bool operator==(const Item&) const = default;
};

struct QuestionnaireModel {
  std::string canonical;  // Questionnaire.url
  std::string title;
  std::string status = "active";
  std::optional<Stage> stage;
  std::vector<Item> items;
  // Elements the parser saw but does not model, as "path: reason".
  std::vector<std::string> ignored;

  const Item* find(const std::string& link_id) const;
};

class QuestionnaireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws QuestionnaireError for duplicate link-ids, enableWhen clauses that
// name an unknown or later item, unknown item types and malformed values.
QuestionnaireModel parse_questionnaire(const nlohmann::json& doc);
nlohmann::json serialize(const QuestionnaireModel& model);
QuestionnaireModel load_questionnaire(const std::filesystem::path& path);

// An unanswered clause source disables the item.
bool is_enabled(const Item& item, const Answers& answers);
// Enabled, unanswered items in questionnaire order.
std::vector<const Item*> next_items(const QuestionnaireModel& model, const Answers& answers);

struct ResponseDocument {
  std::string questionnaire;  // canonical id
  std::string subject;        // patient reference
  std::chrono::sys_seconds authored{};
  std::vector<std::pair<std::string, AnswerValue>> answers;

  Answers answer_map() const;
  bool operator==(const ResponseDocument&) const = default;
};

class ResponseError : public std::runtime_error {
 public:
  ResponseError(const std::string& what, std::vector<std::string> problems);
  std::vector<std::string> problems;
};

// Problems with `doc` against `model`: unknown or repeated link-ids, values
// of the wrong type, answers to items that were not enabled. With `complete`
// set, enabled items left unanswered are problems too.
std::vector<std::string> validate_response(const QuestionnaireModel& model, const ResponseDocument& doc,
                                           bool complete = false);

// Orders answers by item. Throws ResponseError when validation with
// complete=true finds anything.
ResponseDocument build_response(const QuestionnaireModel& model, const Answers& answers, std::string subject,
                                std::chrono::sys_seconds authored);

nlohmann::json to_json(const ResponseDocument& doc);
// Structural parse only; pair with validate_response.
ResponseDocument response_from_json(const nlohmann::json& j);

std::string format_timestamp(std::chrono::sys_seconds t);
std::chrono::sys_seconds parse_timestamp(const std::string& s);

}  // namespace eegcare::screening
