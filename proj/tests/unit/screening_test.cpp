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

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "eegcare/screening/mchat.hpp"
#include "eegcare/screening/questionnaire.hpp"

namespace eegcare::screening {
namespace {

using nlohmann::json;

const std::string kDir = std::string(EEGCARE_DATA_DIR) + "/questionnaires/";

json raw(const std::string& name) {
  std::ifstream in(kDir + name);
  return json::parse(in);
}

const QuestionnaireModel& initial() {
  static const auto m = load_questionnaire(kDir + "mchat-rf-initial.json");
  return m;
}

const QuestionnaireModel& follow_up() {
  static const auto m = load_questionnaire(kDir + "mchat-rf-follow-up.json");
  return m;
}

const auto kAuthored = std::chrono::sys_days(std::chrono::year{2026} / 3 / 2) + std::chrono::hours(9);

// Counting oracle over the raw document: for each item, the answer that
// counts toward risk.
std::map<std::string, bool> risky_answer() {
  std::map<std::string, bool> out;
  const auto doc = raw("mchat-rf-initial.json");
  for (const auto& item : doc["item"]) {
    out[item["linkId"]] = item["extension"][0]["valueCode"] == "at-risk-if-yes";
  }
  return out;
}

int oracle_count(const Answers& a) {
  int n = 0;
  for (const auto& [id, risky] : risky_answer()) n += std::get<bool>(a.at(id)) == risky;
  return n;
}

std::string oracle_tier(int score) { return score <= 2 ? "low" : score <= 7 ? "medium" : "high"; }

// Answers with exactly the items in `at_risk` failing.
Answers answers_with(const std::set<std::string>& at_risk) {
  Answers a;
  for (const auto& [id, risky] : risky_answer()) a[id] = at_risk.count(id) ? risky : !risky;
  return a;
}

RiskResult score(const Answers& a) { return score_mchat(initial(), build_response(initial(), a, "Patient/p", kAuthored)); }

TEST(Parse, BundledInitialInstrument) {
  const auto& m = initial();
  EXPECT_EQ(m.items.size(), 20u);
  EXPECT_EQ(m.stage, Stage::kInitial);
  EXPECT_TRUE(m.ignored.empty());
  for (const auto& i : m.items) {
    const bool yes = i.link_id == "2" || i.link_id == "5" || i.link_id == "12";
    EXPECT_EQ(i.scoring, yes ? ScoringTag::kAtRiskIfYes : ScoringTag::kAtRiskIfNo) << i.link_id;
  }
  EXPECT_EQ(follow_up().items.size(), 40u);
}

json doc_with(json items) {
  return {{"resourceType", "Questionnaire"}, {"url", "urn:test"}, {"status", "active"}, {"item", items}};
}

TEST(Parse, Errors) {
  const json b = {{"linkId", "a"}, {"type", "boolean"}};
  auto expect_error = [](const json& d, const std::string& needle) {
    try {
      parse_questionnaire(d);
      ADD_FAILURE() << "accepted: " << needle;
    } catch (const QuestionnaireError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  expect_error(doc_with({b, b}), "duplicate link-id 'a'");
  expect_error(doc_with({b, {{"linkId", "b"}, {"type", "boolean"},
                             {"enableWhen", {{{"question", "zz"}, {"operator", "="}, {"answerBoolean", true}}}}}}),
               "undefined link-id 'zz'");
  expect_error(doc_with({{{"linkId", "b"}, {"type", "boolean"},
                          {"enableWhen", {{{"question", "a"}, {"operator", "="}, {"answerBoolean", true}}}}},
                         b}),
               "later link-id 'a'");
  expect_error(doc_with({{{"linkId", "a"}, {"type", "boolean"},
                          {"enableWhen", {{{"question", "a"}, {"operator", "="}, {"answerBoolean", true}}}}}}),
               "cycle");
  expect_error(doc_with({{{"linkId", "g"}, {"type", "group"}}}), "unknown item type 'group'");
  expect_error(doc_with({b, {{"linkId", "b"}, {"type", "boolean"},
                             {"enableWhen", {{{"question", "a"}, {"operator", "!="}, {"answerBoolean", true}}}}}}),
               "operator '!='");
  expect_error(json{{"resourceType", "Patient"}}, "resourceType");
}

TEST(Parse, UnsupportedElementsAreReported) {
  auto d = doc_with({{{"linkId", "a"}, {"type", "boolean"}, {"required", true}, {"prefix", "1."}}});
  d["publisher"] = "x";
  const auto m = parse_questionnaire(d);
  ASSERT_EQ(m.ignored.size(), 3u);
  EXPECT_EQ(m.ignored[0], "item a.prefix: unsupported element");
  EXPECT_EQ(m.ignored[1], "item a.required: unsupported element");
  EXPECT_EQ(m.ignored[2], "Questionnaire.publisher: unsupported element");
}

TEST(Parse, TwentyItemDocument) {
  json items = json::array();
  for (int i = 0; i < 20; ++i) items.push_back({{"linkId", "q" + std::to_string(i)}, {"type", "boolean"}});
  EXPECT_EQ(parse_questionnaire(doc_with(items)).items.size(), 20u);
}

// Random documents restricted to the supported subset.
json random_doc(std::mt19937& rng) {
  std::uniform_int_distribution<int> n_items(0, 12), coin(0, 1), pick(0, 99);
  json items = json::array();
  std::vector<json> made;
  const int n = n_items(rng);
  for (int i = 0; i < n; ++i) {
    json it{{"linkId", "L" + std::to_string(i)}, {"text", "item " + std::to_string(i)}};
    const bool choice = coin(rng);
    it["type"] = choice ? "choice" : "boolean";
    if (choice) {
      json opts = json::array();
      const int k = 1 + pick(rng) % 4;
      for (int o = 0; o < k; ++o) {
        json c{{"code", "c" + std::to_string(o)}};
        if (coin(rng)) c["display"] = "Option " + std::to_string(o);
        opts.push_back({{"valueCoding", c}});
      }
      it["answerOption"] = opts;
    } else if (coin(rng)) {
      static const char* tags[] = {"pass", "at-risk-if-yes", "at-risk-if-no"};
      it["extension"] = json::array({{{"url", kScoringTagUrl}, {"valueCode", tags[pick(rng) % 3]}}});
    }
    if (!made.empty() && coin(rng)) {
      json clauses = json::array();
      const int k = 1 + pick(rng) % 2;
      for (int c = 0; c < k; ++c) {
        const auto& src = made[static_cast<std::size_t>(pick(rng)) % made.size()];
        json cl{{"question", src["linkId"]}, {"operator", "="}};
        if (src["type"] == "boolean") {
          cl["answerBoolean"] = static_cast<bool>(coin(rng));
        } else {
          const auto& opts = src["answerOption"];
          cl["answerCoding"] = {{"code", opts[static_cast<std::size_t>(pick(rng)) % opts.size()]["valueCoding"]["code"]}};
        }
        clauses.push_back(cl);
      }
      it["enableWhen"] = clauses;
    }
    made.push_back(it);
    items.push_back(it);
  }
  json d{{"resourceType", "Questionnaire"}, {"url", "urn:rand"}, {"status", "draft"}, {"item", items}};
  if (coin(rng)) d["title"] = "Random";
  if (coin(rng)) d["extension"] = json::array({{{"url", kStageUrl}, {"valueCode", coin(rng) ? "initial" : "follow-up"}}});
  return d;
}

TEST(Parse, RoundTripIsStructurallyEqual) {
  std::mt19937 rng(7);
  for (int t = 0; t < 500; ++t) {
    const auto d = random_doc(rng);
    const auto m = parse_questionnaire(d);
    EXPECT_TRUE(m.ignored.empty());
    ASSERT_EQ(serialize(m), d) << d.dump();
    EXPECT_EQ(parse_questionnaire(serialize(m)).items, m.items);
  }
}

QuestionnaireModel chain() {
  return parse_questionnaire(doc_with(
      {{{"linkId", "A"}, {"type", "boolean"}},
       {{"linkId", "B"}, {"type", "boolean"},
        {"enableWhen", {{{"question", "A"}, {"operator", "="}, {"answerBoolean", true}}}}},
       {{"linkId", "C"}, {"type", "boolean"}}}));
}

std::vector<std::string> ids(const std::vector<const Item*>& items) {
  std::vector<std::string> out;
  for (const auto* i : items) out.push_back(i->link_id);
  return out;
}

TEST(NextItems, Examples) {
  const auto m = chain();
  EXPECT_EQ(ids(next_items(m, {})), (std::vector<std::string>{"A", "C"}));
  EXPECT_EQ(ids(next_items(m, {{"A", true}})), (std::vector<std::string>{"B", "C"}));
  EXPECT_EQ(ids(next_items(m, {{"A", false}})), (std::vector<std::string>{"C"}));
  EXPECT_EQ(next_items(initial(), {}).size(), 20u);
}

TEST(BuildResponse, Examples) {
  const auto empty = parse_questionnaire(doc_with(json::array()));
  EXPECT_TRUE(build_response(empty, {}, "Patient/p", kAuthored).answers.empty());

  const auto doc = build_response(initial(), answers_with({}), "Patient/p", kAuthored);
  ASSERT_EQ(doc.answers.size(), 20u);
  for (std::size_t i = 0; i < 20; ++i) EXPECT_EQ(doc.answers[i].first, initial().items[i].link_id);

  const auto m = chain();
  EXPECT_THROW(build_response(m, {{"A", false}, {"B", true}, {"C", true}}, "p", kAuthored), ResponseError);
  EXPECT_THROW(build_response(m, {{"A", true}, {"C", true}}, "p", kAuthored), ResponseError);  // B missing
  EXPECT_THROW(build_response(m, {{"A", "x"}, {"C", true}}, "p", kAuthored), ResponseError);
  EXPECT_THROW(build_response(m, {{"A", false}, {"C", true}, {"Z", true}}, "p", kAuthored), ResponseError);
  EXPECT_NO_THROW(build_response(m, {{"A", false}, {"C", true}}, "p", kAuthored));
}

TEST(BuildResponse, JsonRoundTripAndRevalidation) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int t = 0; t < 200; ++t) {
    Answers a;
    for (const auto& [id, risky] : risky_answer()) a[id] = static_cast<bool>(coin(rng));
    const auto doc = build_response(initial(), a, "Patient/x" + std::to_string(t), kAuthored + std::chrono::seconds(t));
    const auto back = response_from_json(json::parse(to_json(doc).dump()));
    EXPECT_EQ(back, doc);
    EXPECT_TRUE(validate_response(initial(), back, true).empty());
  }
}

TEST(Timestamp, FormatAndParse) {
  EXPECT_EQ(format_timestamp(kAuthored), "2026-03-02T09:00:00Z");
  EXPECT_EQ(parse_timestamp("2026-03-02T09:00:00Z"), kAuthored);
  EXPECT_EQ(parse_timestamp("2026-03-02T11:00:00+02:00"), kAuthored);
  EXPECT_THROW(parse_timestamp("2026-13-02T09:00:00Z"), std::invalid_argument);
  EXPECT_THROW(parse_timestamp("yesterday"), std::invalid_argument);
}

// Answering in random order through next_items ends with the answered set
// build_response accepts, and build_response rejects anything else.
TEST(EnableWhen, SoundnessForRandomOrders) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> coin(0, 1), pick(0, 1 << 20);
  for (int t = 0; t < 400; ++t) {
    const auto m = parse_questionnaire(random_doc(rng));
    // Intended answer for every item.
    Answers intended;
    for (const auto& i : m.items) {
      if (i.type == ItemType::kBoolean) {
        intended[i.link_id] = static_cast<bool>(coin(rng));
      } else {
        intended[i.link_id] = i.options[static_cast<std::size_t>(pick(rng)) % i.options.size()].code;
      }
    }
    Answers given;
    while (true) {
      auto offered = next_items(m, given);
      if (offered.empty()) break;
      const auto* item = offered[static_cast<std::size_t>(pick(rng)) % offered.size()];
      given[item->link_id] = intended.at(item->link_id);
    }
    const auto doc = build_response(m, given, "p", kAuthored);
    EXPECT_EQ(doc.answers.size(), given.size());
    // Any other subset of the intended answers is rejected.
    Answers other;
    for (const auto& [id, v] : intended) {
      if (coin(rng)) other[id] = v;
    }
    if (other != given) EXPECT_THROW(build_response(m, other, "p", kAuthored), ResponseError);
  }
}

TEST(Score, Examples) {
  const auto r0 = score(answers_with({}));
  EXPECT_EQ(r0, (RiskResult{Stage::kInitial, 0, Tier::kLow, Action::kRescreenLater}));
  const auto r5 = score(answers_with({"1", "2", "3", "4", "5"}));
  EXPECT_EQ(r5, (RiskResult{Stage::kInitial, 5, Tier::kMedium, Action::kAdministerFollowUp}));
  const auto r9 = score(answers_with({"1", "2", "3", "4", "5", "6", "7", "8", "9"}));
  EXPECT_EQ(r9, (RiskResult{Stage::kInitial, 9, Tier::kHigh, Action::kRefer}));
}

TEST(Score, ExhaustiveTierBoundaries) {
  std::vector<std::string> order;
  for (int i = 1; i <= 20; ++i) order.push_back(std::to_string(i));
  for (int s = 0; s <= 20; ++s) {
    const auto r = score(answers_with({order.begin(), order.begin() + s}));
    EXPECT_EQ(r.score, s);
    EXPECT_EQ(to_string(r.tier), oracle_tier(s)) << s;
    const std::string action = s <= 2 ? "rescreen-later" : s <= 7 ? "administer-follow-up" : "refer";
    EXPECT_EQ(to_string(r.action), action) << s;
  }
  EXPECT_EQ(classify(Stage::kFollowUp, 1).action, Action::kRescreenLater);
  EXPECT_EQ(classify(Stage::kFollowUp, 2).action, Action::kRefer);
}

TEST(Score, RandomVectorsMatchCountingOracle) {
  std::mt19937 rng(2026);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int t = 0; t < 10000; ++t) {
    Answers a;
    for (const auto& [id, risky] : risky_answer()) a[id] = static_cast<bool>(coin(rng));
    const auto r = score(a);
    ASSERT_EQ(r.score, oracle_count(a));
    ASSERT_EQ(to_string(r.tier), oracle_tier(r.score));
  }
}

TEST(Score, FlippingToAtRiskIsMonotone) {
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> coin(0, 1);
  const auto risky = risky_answer();
  for (int t = 0; t < 2000; ++t) {
    Answers a;
    for (const auto& [id, r] : risky) a[id] = static_cast<bool>(coin(rng));
    const auto before = score(a);
    for (const auto& [id, r] : risky) {
      if (std::get<bool>(a[id]) == r) continue;
      Answers b = a;
      b[id] = r;
      const auto after = score(b);
      ASSERT_GE(after.score, before.score);
      ASSERT_GE(static_cast<int>(after.tier), static_cast<int>(before.tier));
    }
  }
}

TEST(Score, IncompleteResponseListsMissingItems) {
  ResponseDocument doc{initial().canonical, "Patient/p", kAuthored, {}};
  for (int i = 1; i <= 20; ++i) {
    if (i != 4 && i != 17) doc.answers.emplace_back(std::to_string(i), true);
  }
  try {
    score_mchat(initial(), doc);
    FAIL();
  } catch (const ScoringError& e) {
    EXPECT_EQ(e.missing, (std::vector<std::string>{"4", "17"}));
  }
  doc.answers.emplace_back("99", true);
  EXPECT_THROW(score_mchat(initial(), doc), ResponseError);
}

TEST(FollowUp, CarriedFailuresGateTheInterview) {
  const auto first = build_response(initial(), answers_with({"3", "5", "7", "9"}), "Patient/p", kAuthored);
  const auto r = score_mchat(initial(), first);
  ASSERT_EQ(r.action, Action::kAdministerFollowUp);

  auto carry = follow_up_carry(initial(), first);
  EXPECT_EQ(std::count_if(carry.begin(), carry.end(), [](const auto& kv) { return std::get<bool>(kv.second); }), 4);
  const auto offered = ids(next_items(follow_up(), carry));
  EXPECT_EQ(offered, (std::vector<std::string>{"followup-3", "followup-5", "followup-7", "followup-9"}));

  // Unanswered follow-up items are missing.
  ResponseDocument partial{follow_up().canonical, "Patient/p", kAuthored, {}};
  for (const auto& [id, v] : carry) partial.answers.emplace_back(id, v);
  EXPECT_THROW(score_mchat(follow_up(), partial), ScoringError);

  auto one = carry;
  for (const auto& id : offered) one[id] = id == "followup-5";
  EXPECT_EQ(score_mchat(follow_up(), build_response(follow_up(), one, "Patient/p", kAuthored)),
            (RiskResult{Stage::kFollowUp, 1, Tier::kLow, Action::kRescreenLater}));
  auto two = one;
  two["followup-9"] = true;
  EXPECT_EQ(score_mchat(follow_up(), build_response(follow_up(), two, "Patient/p", kAuthored)),
            (RiskResult{Stage::kFollowUp, 2, Tier::kHigh, Action::kRefer}));
  // Answering an interview item for a passed initial item is rejected.
  two["followup-1"] = false;
  EXPECT_THROW(build_response(follow_up(), two, "Patient/p", kAuthored), ResponseError);
}

TEST(Examples, BundledResponsesScore) {
  auto load = [](const std::string& n) { return response_from_json(raw(n)); };
  EXPECT_EQ(score_mchat(initial(), load("example-all-pass.json")).score, 0);
  const auto r = score_mchat(initial(), load("example-nine-at-risk.json"));
  EXPECT_EQ(r.score, 9);
  EXPECT_EQ(r.action, Action::kRefer);
}

}  // namespace
}  // namespace eegcare::screening
