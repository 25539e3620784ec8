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

#include "eegcare/screening/questionnaire.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace eegcare::screening {

using nlohmann::json;

std::string_view to_string(ItemType t) { return t == ItemType::kBoolean ? "boolean" : "choice"; }

std::string_view to_string(ScoringTag t) {
  switch (t) {
    case ScoringTag::kNone:
      return "none";
    case ScoringTag::kPass:
      return "pass";
    case ScoringTag::kAtRiskIfYes:
      return "at-risk-if-yes";
    case ScoringTag::kAtRiskIfNo:
      return "at-risk-if-no";
  }
  return "?";
}

std::string_view to_string(Stage s) { return s == Stage::kInitial ? "initial" : "follow-up"; }

std::string to_string(const AnswerValue& v) {
  if (const bool* b = std::get_if<bool>(&v)) return *b ? "yes" : "no";
  return std::get<std::string>(v);
}

const Item* QuestionnaireModel::find(const std::string& link_id) const {
  for (const auto& i : items) {
    if (i.link_id == link_id) return &i;
  }
  return nullptr;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw QuestionnaireError(msg); }

std::string string_at(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_string()) fail(where + ": '" + key + "' must be a string");
  return j.at(key).get<std::string>();
}

ScoringTag parse_tag(const std::string& code, const std::string& where) {
  for (auto t : {ScoringTag::kNone, ScoringTag::kPass, ScoringTag::kAtRiskIfYes, ScoringTag::kAtRiskIfNo}) {
    if (code == to_string(t)) return t;
  }
  fail(where + ": unknown scoring tag '" + code + "'");
}

AnswerValue parse_clause_answer(const json& c, const std::string& where) {
  if (c.contains("answerBoolean")) {
    if (!c.at("answerBoolean").is_boolean()) fail(where + ": answerBoolean must be a boolean");
    return c.at("answerBoolean").get<bool>();
  }
  if (c.contains("answerCoding")) return string_at(c.at("answerCoding"), "code", where + ".answerCoding");
  fail(where + ": enableWhen needs answerBoolean or answerCoding");
}

Item parse_item(const json& j, std::size_t index, const QuestionnaireModel& model,
               const std::set<std::string>& all_ids, std::vector<std::string>& ignored) {
  const std::string where = "item[" + std::to_string(index) + "]";
  if (!j.is_object()) fail(where + ": not an object");
  Item item;
  item.link_id = string_at(j, "linkId", where);
  if (item.link_id.empty()) fail(where + ": empty linkId");
  const std::string at = "item " + item.link_id;
  if (j.contains("text")) item.text = string_at(j, "text", at);
  const auto type = string_at(j, "type", at);
  if (type == "boolean") {
    item.type = ItemType::kBoolean;
  } else if (type == "choice") {
    item.type = ItemType::kChoice;
  } else {
    fail(at + ": unknown item type '" + type + "'");
  }
  if (j.contains("item")) fail(at + ": nested items are not supported");

  for (const auto& [key, value] : j.items()) {
    if (key == "linkId" || key == "text" || key == "type") continue;
    if (key == "answerOption") {
      if (item.type != ItemType::kChoice) fail(at + ": answerOption on a non-choice item");
      for (const auto& o : value) {
        if (!o.contains("valueCoding")) fail(at + ": answerOption must use valueCoding");
        const auto& c = o.at("valueCoding");
        AnswerOption opt{string_at(c, "code", at + ".answerOption"), c.value("display", std::string())};
        for (const auto& prev : item.options) {
          if (prev.code == opt.code) fail(at + ": duplicate answer option '" + opt.code + "'");
        }
        item.options.push_back(std::move(opt));
      }
    } else if (key == "enableWhen") {
      for (const auto& c : value) {
        EnableWhen ew;
        ew.question = string_at(c, "question", at + ".enableWhen");
        const auto op = string_at(c, "operator", at + ".enableWhen");
        if (op != "=") fail(at + ": enableWhen operator '" + op + "' is not supported");
        if (ew.question == item.link_id) fail(at + ": enableWhen cycle through itself");
        const Item* src = model.find(ew.question);
        if (!src) {
          fail(at + ": enableWhen references " + (all_ids.count(ew.question) ? "later" : "undefined") +
               " link-id '" + ew.question + "'");
        }
        ew.answer = parse_clause_answer(c, at + ".enableWhen");
        if (src->type == ItemType::kBoolean && !std::holds_alternative<bool>(ew.answer)) {
          fail(at + ": enableWhen on boolean item '" + ew.question + "' needs answerBoolean");
        }
        if (src->type == ItemType::kChoice) {
          const auto* code = std::get_if<std::string>(&ew.answer);
          if (!code) fail(at + ": enableWhen on choice item '" + ew.question + "' needs answerCoding");
          bool known = false;
          for (const auto& o : src->options) known = known || o.code == *code;
          if (!known) fail(at + ": enableWhen answer '" + *code + "' is not an option of '" + ew.question + "'");
        }
        item.enable_when.push_back(std::move(ew));
      }
    } else if (key == "enableBehavior") {
      if (value != "all") fail(at + ": enableBehavior '" + value.dump() + "' is not supported");
      ignored.push_back(at + ".enableBehavior: 'all' is implied");
    } else if (key == "extension") {
      for (const auto& e : value) {
        if (e.value("url", std::string()) == kScoringTagUrl) {
          item.scoring = parse_tag(string_at(e, "valueCode", at + ".extension"), at);
        } else {
          ignored.push_back(at + ".extension " + e.value("url", std::string("?")) + ": unknown extension");
        }
      }
    } else {
      ignored.push_back(at + "." + key + ": unsupported element");
    }
  }
  if (item.type == ItemType::kChoice && item.options.empty()) fail(at + ": choice item without answerOption");
  if (item.type == ItemType::kChoice && item.scoring != ScoringTag::kNone && item.scoring != ScoringTag::kPass) {
    fail(at + ": yes/no scoring tags need a boolean item");
  }
  return item;
}

json clause_answer_json(const AnswerValue& v) {
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  return json{{"code", std::get<std::string>(v)}};
}

}  // namespace

QuestionnaireModel parse_questionnaire(const json& doc) {
  if (!doc.is_object()) fail("questionnaire document must be an object");
  if (doc.value("resourceType", std::string()) != "Questionnaire") fail("resourceType must be 'Questionnaire'");
  QuestionnaireModel m;
  m.canonical = string_at(doc, "url", "Questionnaire");
  for (const auto& [key, value] : doc.items()) {
    if (key == "resourceType" || key == "url") continue;
    if (key == "title") {
      m.title = string_at(doc, "title", "Questionnaire");
    } else if (key == "status") {
      m.status = string_at(doc, "status", "Questionnaire");
    } else if (key == "extension") {
      for (const auto& e : value) {
        if (e.value("url", std::string()) == kStageUrl) {
          const auto code = string_at(e, "valueCode", "Questionnaire.extension");
          if (code == "initial") {
            m.stage = Stage::kInitial;
          } else if (code == "follow-up") {
            m.stage = Stage::kFollowUp;
          } else {
            fail("unknown screening stage '" + code + "'");
          }
        } else {
          m.ignored.push_back("Questionnaire.extension " + e.value("url", std::string("?")) + ": unknown extension");
        }
      }
    } else if (key == "item") {
      if (!value.is_array()) fail("Questionnaire.item must be an array");
      std::set<std::string> all_ids, seen;
      for (const auto& i : value) {
        if (i.is_object() && i.contains("linkId") && i.at("linkId").is_string()) {
          all_ids.insert(i.at("linkId").get<std::string>());
        }
      }
      for (std::size_t i = 0; i < value.size(); ++i) {
        Item item = parse_item(value[i], i, m, all_ids, m.ignored);
        if (!seen.insert(item.link_id).second) fail("duplicate link-id '" + item.link_id + "'");
        m.items.push_back(std::move(item));
      }
    } else {
      m.ignored.push_back("Questionnaire." + key + ": unsupported element");
    }
  }
  return m;
}

json serialize(const QuestionnaireModel& model) {
  json doc{{"resourceType", "Questionnaire"}, {"url", model.canonical}, {"status", model.status}};
  if (!model.title.empty()) doc["title"] = model.title;
  if (model.stage) doc["extension"] = json::array({{{"url", kStageUrl}, {"valueCode", to_string(*model.stage)}}});
  json items = json::array();
  for (const auto& i : model.items) {
    json j{{"linkId", i.link_id}, {"type", to_string(i.type)}};
    if (!i.text.empty()) j["text"] = i.text;
    if (i.type == ItemType::kChoice) {
      json opts = json::array();
      for (const auto& o : i.options) {
        json c{{"code", o.code}};
        if (!o.display.empty()) c["display"] = o.display;
        opts.push_back({{"valueCoding", c}});
      }
      j["answerOption"] = opts;
    }
    if (!i.enable_when.empty()) {
      json clauses = json::array();
      for (const auto& c : i.enable_when) {
        json cj{{"question", c.question}, {"operator", "="}};
        cj[std::holds_alternative<bool>(c.answer) ? "answerBoolean" : "answerCoding"] = clause_answer_json(c.answer);
        clauses.push_back(cj);
      }
      j["enableWhen"] = clauses;
    }
    if (i.scoring != ScoringTag::kNone) {
      j["extension"] = json::array({{{"url", kScoringTagUrl}, {"valueCode", to_string(i.scoring)}}});
    }
    items.push_back(j);
  }
  doc["item"] = items;
  return doc;
}

QuestionnaireModel load_questionnaire(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw QuestionnaireError("cannot open questionnaire " + path.string());
  try {
    return parse_questionnaire(json::parse(in));
  } catch (const json::exception& e) {
    throw QuestionnaireError(path.string() + ": " + e.what());
  }
}

bool is_enabled(const Item& item, const Answers& answers) {
  for (const auto& c : item.enable_when) {
    auto it = answers.find(c.question);
    if (it == answers.end() || it->second != c.answer) return false;
  }
  return true;
}

std::vector<const Item*> next_items(const QuestionnaireModel& model, const Answers& answers) {
  std::vector<const Item*> out;
  for (const auto& i : model.items) {
    if (!answers.count(i.link_id) && is_enabled(i, answers)) out.push_back(&i);
  }
  return out;
}

Answers ResponseDocument::answer_map() const {
  Answers m;
  for (const auto& [id, v] : answers) m.emplace(id, v);
  return m;
}

ResponseError::ResponseError(const std::string& what, std::vector<std::string> p)
    : std::runtime_error([&] {
        std::string s = what;
        for (const auto& x : p) s += "\n  " + x;
        return s;
      }()),
      problems(std::move(p)) {}

std::vector<std::string> validate_response(const QuestionnaireModel& model, const ResponseDocument& doc,
                                           bool complete) {
  std::vector<std::string> problems;
  if (doc.questionnaire != model.canonical) {
    problems.push_back("response is for '" + doc.questionnaire + "', not '" + model.canonical + "'");
  }
  std::set<std::string> seen;
  const Answers answers = doc.answer_map();
  for (const auto& [id, value] : doc.answers) {
    if (!seen.insert(id).second) {
      problems.push_back(id + ": answered more than once");
      continue;
    }
    const Item* item = model.find(id);
    if (!item) {
      problems.push_back(id + ": no such item");
      continue;
    }
    if (item->type == ItemType::kBoolean && !std::holds_alternative<bool>(value)) {
      problems.push_back(id + ": boolean item needs a boolean answer");
      continue;
    }
    if (item->type == ItemType::kChoice) {
      const auto* code = std::get_if<std::string>(&value);
      bool known = false;
      if (code) {
        for (const auto& o : item->options) known = known || o.code == *code;
      }
      if (!known) {
        problems.push_back(id + ": answer '" + to_string(value) + "' is not an option");
        continue;
      }
    }
    // Clauses only name earlier items, so the full map is the prior answers.
    if (!is_enabled(*item, answers)) problems.push_back(id + ": answered but not enabled");
  }
  if (complete) {
    for (const auto* item : next_items(model, answers)) problems.push_back(item->link_id + ": missing answer");
  }
  return problems;
}

ResponseDocument build_response(const QuestionnaireModel& model, const Answers& answers, std::string subject,
                                std::chrono::sys_seconds authored) {
  ResponseDocument doc;
  doc.questionnaire = model.canonical;
  doc.subject = std::move(subject);
  doc.authored = authored;
  std::vector<std::string> problems;
  for (const auto& [id, v] : answers) {
    if (!model.find(id)) problems.push_back(id + ": no such item");
  }
  for (const auto& i : model.items) {
    auto it = answers.find(i.link_id);
    if (it != answers.end()) doc.answers.emplace_back(i.link_id, it->second);
  }
  for (auto& p : validate_response(model, doc, true)) problems.push_back(std::move(p));
  if (!problems.empty()) throw ResponseError("invalid response", std::move(problems));
  return doc;
}

json to_json(const ResponseDocument& doc) {
  json items = json::array();
  for (const auto& [id, v] : doc.answers) {
    json a;
    if (const bool* b = std::get_if<bool>(&v)) {
      a["valueBoolean"] = *b;
    } else {
      a["valueCoding"] = {{"code", std::get<std::string>(v)}};
    }
    items.push_back({{"linkId", id}, {"answer", json::array({a})}});
  }
  return {{"resourceType", "QuestionnaireResponse"},
          {"questionnaire", doc.questionnaire},
          {"status", "completed"},
          {"subject", {{"reference", doc.subject}}},
          {"authored", format_timestamp(doc.authored)},
          {"item", items}};
}

ResponseDocument response_from_json(const json& j) {
  auto bad = [](const std::string& m) { return ResponseError("malformed response", {m}); };
  if (!j.is_object() || j.value("resourceType", std::string()) != "QuestionnaireResponse") {
    throw bad("resourceType must be 'QuestionnaireResponse'");
  }
  ResponseDocument doc;
  try {
    doc.questionnaire = j.at("questionnaire").get<std::string>();
    doc.subject = j.at("subject").at("reference").get<std::string>();
    doc.authored = parse_timestamp(j.at("authored").get<std::string>());
    for (const auto& item : j.value("item", json::array())) {
      const auto id = item.at("linkId").get<std::string>();
      const auto& answer = item.at("answer");
      if (!answer.is_array() || answer.size() != 1) throw bad(id + ": expected exactly one answer");
      const auto& a = answer[0];
      if (a.contains("valueBoolean")) {
        doc.answers.emplace_back(id, a.at("valueBoolean").get<bool>());
      } else if (a.contains("valueCoding")) {
        doc.answers.emplace_back(id, a.at("valueCoding").at("code").get<std::string>());
      } else {
        throw bad(id + ": answer needs valueBoolean or valueCoding");
      }
    }
  } catch (const json::exception& e) {
    throw bad(e.what());
  } catch (const std::invalid_argument& e) {
    throw bad(e.what());
  }
  return doc;
}

std::string format_timestamp(std::chrono::sys_seconds t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::year_month_day ymd(day);
  const std::chrono::hh_mm_ss hms(t - day);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

std::chrono::sys_seconds parse_timestamp(const std::string& s) {
  int y, mo, d, h, mi, sec, n = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &y, &mo, &d, &h, &mi, &sec, &n) != 6) {
    throw std::invalid_argument("bad timestamp '" + s + "'");
  }
  std::string rest = s.substr(static_cast<std::size_t>(n));
  int offset_min = 0;
  if (rest != "Z") {
    int oh, om;
    char sign;
    if (std::sscanf(rest.c_str(), "%c%2d:%2d", &sign, &oh, &om) != 3 || (sign != '+' && sign != '-') ||
        rest.size() != 6) {
      throw std::invalid_argument("bad timestamp zone '" + s + "'");
    }
    offset_min = (sign == '+' ? 1 : -1) * (oh * 60 + om);
  }
  const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(mo)),
                                        std::chrono::day(static_cast<unsigned>(d))};
  if (!ymd.ok() || h > 23 || mi > 59 || sec > 60) throw std::invalid_argument("bad timestamp '" + s + "'");
  return std::chrono::sys_days(ymd) + std::chrono::hours(h) + std::chrono::minutes(mi - offset_min) +
         std::chrono::seconds(sec);
}

}  // namespace eegcare::screening
