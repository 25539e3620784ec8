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

#include "eegcare/gateway/store.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "eegcare/gateway/blob_store.hpp"

namespace eegcare::gateway {

using nlohmann::json;
using Code = StoreError::Code;

std::string_view to_string(ArtifactKind k) {
  switch (k) {
    case ArtifactKind::kRecording:
      return "recording";
    case ArtifactKind::kResponse:
      return "response";
    case ArtifactKind::kReport:
      return "report";
  }
  return "?";
}

std::optional<ArtifactKind> artifact_kind_from(std::string_view s) {
  for (auto k : {ArtifactKind::kRecording, ArtifactKind::kResponse, ArtifactKind::kReport}) {
    if (s == to_string(k)) return k;
  }
  return std::nullopt;
}

std::string format_date(std::chrono::year_month_day d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()));
  return buf;
}

std::optional<std::chrono::year_month_day> parse_date(const std::string& s) {
  int y, m, d, n = 0;
  if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &y, &m, &d, &n) != 3 || n != 10) return std::nullopt;
  std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(static_cast<unsigned>(m)),
                                  std::chrono::day(static_cast<unsigned>(d))};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

json to_json(const PatientRecord& p) {
  return {{"id", p.id},
          {"name", p.name},
          {"birth_date", p.birth_date ? json(format_date(*p.birth_date)) : json(nullptr)},
          {"sex", std::string(1, p.sex)},
          {"created_at", p.created_at.time_since_epoch().count()},
          {"archived", p.archived},
          {"version", p.version}};
}

json to_json(const StoredArtifact& a) {
  json j{{"id", a.id},
         {"patient_id", a.patient_id},
         {"kind", to_string(a.kind)},
         {"hash", a.hash},
         {"size", a.size},
         {"created_at", a.created_at.time_since_epoch().count()},
         {"metadata", a.metadata}};
  if (!a.parent_id.empty()) j["parent_id"] = a.parent_id;
  return j;
}

namespace {

class Stmt {
 public:
  Stmt(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &s_, nullptr) != SQLITE_OK) {
      throw std::runtime_error(std::string("sqlite prepare: ") + sqlite3_errmsg(db));
    }
  }
  ~Stmt() { sqlite3_finalize(s_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(int i, const std::string& v) {
    sqlite3_bind_text(s_, i, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Stmt& bind(int i, std::int64_t v) {
    sqlite3_bind_int64(s_, i, v);
    return *this;
  }
  // SQLITE_ROW -> true, SQLITE_DONE -> false.
  bool step() {
    const int rc = sqlite3_step(s_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if ((rc & 0xFF) == SQLITE_CONSTRAINT) throw StoreError(Code::kConflict, sqlite3_errmsg(db_));
    throw std::runtime_error(std::string("sqlite step: ") + sqlite3_errmsg(db_));
  }
  std::string text(int col) const {
    const auto* p = sqlite3_column_text(s_, col);
    return p ? std::string(reinterpret_cast<const char*>(p)) : std::string();
  }
  std::int64_t integer(int col) const { return sqlite3_column_int64(s_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* s_ = nullptr;
};

constexpr const char* kPatientCols = "id, name, birth_date, sex, created_at, archived, version";
constexpr const char* kArtifactCols = "id, patient_id, kind, parent_id, hash, size, created_at, metadata";

PatientRecord read_patient(const Stmt& s) {
  PatientRecord p;
  p.id = s.text(0);
  p.name = s.text(1);
  p.birth_date = parse_date(s.text(2));
  const auto sex = s.text(3);
  p.sex = sex.empty() ? 'X' : sex[0];
  p.created_at = std::chrono::sys_seconds(std::chrono::seconds(s.integer(4)));
  p.archived = s.integer(5) != 0;
  p.version = s.integer(6);
  return p;
}

StoredArtifact read_artifact(const Stmt& s) {
  StoredArtifact a;
  a.id = s.text(0);
  a.patient_id = s.text(1);
  a.kind = artifact_kind_from(s.text(2)).value_or(ArtifactKind::kRecording);
  a.parent_id = s.text(3);
  a.hash = s.text(4);
  a.size = s.integer(5);
  a.created_at = std::chrono::sys_seconds(std::chrono::seconds(s.integer(6)));
  a.metadata = json::parse(s.text(7));
  return a;
}

std::chrono::sys_seconds now_s() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

bool name_matches(const std::string& name, const std::string& q) {
  const auto n = lower(name), lq = lower(q);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const bool word_start = i == 0 || std::isspace(static_cast<unsigned char>(n[i - 1]));
    if (word_start && n.compare(i, lq.size(), lq) == 0) return true;
  }
  return false;
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isalnum(c) || c == '-' || c == '_' || c == '.'; });
}

}  // namespace

Store::Store(const std::filesystem::path& db_path) {
  if (db_path != ":memory:" && db_path.has_parent_path()) std::filesystem::create_directories(db_path.parent_path());
  if (sqlite3_open_v2(db_path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    throw std::runtime_error("cannot open database " + db_path.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("PRAGMA foreign_keys = ON");
  if (db_path != ":memory:") exec("PRAGMA journal_mode = WAL");
  exec(
      "CREATE TABLE IF NOT EXISTS patients ("
      " id TEXT PRIMARY KEY, name TEXT NOT NULL, birth_date TEXT NOT NULL, sex TEXT NOT NULL,"
      " created_at INTEGER NOT NULL, archived INTEGER NOT NULL DEFAULT 0, version INTEGER NOT NULL DEFAULT 1)");
  exec(
      "CREATE TABLE IF NOT EXISTS artifacts ("
      " id TEXT PRIMARY KEY, patient_id TEXT NOT NULL REFERENCES patients(id) ON DELETE RESTRICT,"
      " kind TEXT NOT NULL, parent_id TEXT NOT NULL DEFAULT '', hash TEXT NOT NULL, size INTEGER NOT NULL,"
      " created_at INTEGER NOT NULL, metadata TEXT NOT NULL)");
  exec("CREATE INDEX IF NOT EXISTS artifacts_patient ON artifacts(patient_id)");
  exec("CREATE INDEX IF NOT EXISTS artifacts_parent ON artifacts(parent_id)");
}

Store::~Store() { sqlite3_close(db_); }

void Store::exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "?";
    sqlite3_free(err);
    throw std::runtime_error(std::string("sqlite: ") + msg);
  }
}

void Store::check_patient_fields(const PatientRecord& p) const {
  if (p.name.empty()) throw StoreError(Code::kInvalid, "name must not be empty");
  if (p.sex != 'F' && p.sex != 'M' && p.sex != 'X') throw StoreError(Code::kInvalid, "sex must be F, M or X");
  if (p.birth_date) {
    const auto today = std::chrono::year_month_day(std::chrono::floor<std::chrono::days>(std::chrono::system_clock::now()));
    if (std::chrono::sys_days(*p.birth_date) > std::chrono::sys_days(today)) {
      throw StoreError(Code::kInvalid, "date of birth is in the future");
    }
  }
}

PatientRecord Store::create_patient(PatientRecord p) {
  if (p.id.empty()) p.id = "pat-" + random_hex(8);
  if (!valid_id(p.id)) throw StoreError(Code::kInvalid, "patient id must be 1-64 of [A-Za-z0-9._-]");
  check_patient_fields(p);
  p.created_at = now_s();
  p.archived = false;
  p.version = 1;
  std::lock_guard lock(mu_);
  Stmt s(db_, "INSERT INTO patients (id, name, birth_date, sex, created_at, archived, version) VALUES (?,?,?,?,?,0,1)");
  s.bind(1, p.id).bind(2, p.name).bind(3, p.birth_date ? format_date(*p.birth_date) : std::string());
  s.bind(4, std::string(1, p.sex)).bind(5, static_cast<std::int64_t>(p.created_at.time_since_epoch().count()));
  try {
    s.step();
  } catch (const StoreError&) {
    throw StoreError(Code::kConflict, "patient " + p.id + " already exists");
  }
  return p;
}

std::optional<PatientRecord> Store::get_patient(const std::string& id) const {
  std::lock_guard lock(mu_);
  Stmt s(db_, (std::string("SELECT ") + kPatientCols + " FROM patients WHERE id = ?").c_str());
  s.bind(1, id);
  if (!s.step()) return std::nullopt;
  return read_patient(s);
}

std::vector<PatientRecord> Store::search_patients(const std::string& query, bool include_archived) const {
  std::vector<PatientRecord> out;
  std::lock_guard lock(mu_);
  Stmt s(db_, (std::string("SELECT ") + kPatientCols + " FROM patients ORDER BY name, id").c_str());
  while (s.step()) {
    auto p = read_patient(s);
    if (p.archived && !include_archived) continue;
    if (query.empty() || p.id == query || name_matches(p.name, query)) out.push_back(std::move(p));
  }
  return out;
}

PatientRecord Store::update_patient(const std::string& id, const PatientPatch& patch,
                                    std::optional<std::int64_t> expected_version) {
  std::lock_guard lock(mu_);
  Stmt get(db_, (std::string("SELECT ") + kPatientCols + " FROM patients WHERE id = ?").c_str());
  get.bind(1, id);
  if (!get.step()) throw StoreError(Code::kNotFound, "no patient " + id);
  PatientRecord p = read_patient(get);
  if (expected_version && *expected_version != p.version) {
    throw StoreError(Code::kPrecondition,
                     "patient " + id + " is at version " + std::to_string(p.version) + ", not " +
                         std::to_string(*expected_version));
  }
  if (patch.name) p.name = *patch.name;
  if (patch.birth_date) p.birth_date = *patch.birth_date;
  if (patch.sex) p.sex = *patch.sex;
  if (patch.archived) p.archived = *patch.archived;
  check_patient_fields(p);
  // Compare-and-swap on the version read above.
  Stmt up(db_,
          "UPDATE patients SET name = ?, birth_date = ?, sex = ?, archived = ?, version = version + 1"
          " WHERE id = ? AND version = ?");
  up.bind(1, p.name).bind(2, p.birth_date ? format_date(*p.birth_date) : std::string());
  up.bind(3, std::string(1, p.sex)).bind(4, static_cast<std::int64_t>(p.archived)).bind(5, id).bind(6, p.version);
  up.step();
  if (sqlite3_changes(db_) != 1) throw StoreError(Code::kPrecondition, "patient " + id + " changed concurrently");
  ++p.version;
  return p;
}

void Store::delete_patient(const std::string& id) {
  std::lock_guard lock(mu_);
  Stmt count(db_, "SELECT COUNT(*) FROM artifacts WHERE patient_id = ?");
  count.bind(1, id);
  count.step();
  if (count.integer(0) > 0) {
    throw StoreError(Code::kConflict, "patient " + id + " has " + std::to_string(count.integer(0)) +
                                          " artifacts; archive instead");
  }
  Stmt del(db_, "DELETE FROM patients WHERE id = ?");
  del.bind(1, id);
  del.step();
  if (sqlite3_changes(db_) != 1) throw StoreError(Code::kNotFound, "no patient " + id);
}

StoredArtifact Store::add_artifact(StoredArtifact a) {
  std::lock_guard lock(mu_);
  Stmt get(db_, "SELECT archived FROM patients WHERE id = ?");
  get.bind(1, a.patient_id);
  if (!get.step()) throw StoreError(Code::kNotFound, "no patient " + a.patient_id);
  if (get.integer(0) != 0) throw StoreError(Code::kConflict, "patient " + a.patient_id + " is archived");
  static constexpr const char* prefix[] = {"rec-", "rsp-", "rpt-"};
  a.id = prefix[static_cast<int>(a.kind)] + random_hex(8);
  a.created_at = now_s();
  Stmt s(db_,
         "INSERT INTO artifacts (id, patient_id, kind, parent_id, hash, size, created_at, metadata)"
         " VALUES (?,?,?,?,?,?,?,?)");
  s.bind(1, a.id).bind(2, a.patient_id).bind(3, std::string(to_string(a.kind))).bind(4, a.parent_id);
  s.bind(5, a.hash).bind(6, a.size).bind(7, static_cast<std::int64_t>(a.created_at.time_since_epoch().count()));
  s.bind(8, a.metadata.dump());
  s.step();
  return a;
}

std::optional<StoredArtifact> Store::get_artifact(const std::string& id) const {
  std::lock_guard lock(mu_);
  Stmt s(db_, (std::string("SELECT ") + kArtifactCols + " FROM artifacts WHERE id = ?").c_str());
  s.bind(1, id);
  if (!s.step()) return std::nullopt;
  return read_artifact(s);
}

std::vector<StoredArtifact> Store::artifacts_for(const std::string& patient_id,
                                                 std::optional<ArtifactKind> kind) const {
  std::vector<StoredArtifact> out;
  std::lock_guard lock(mu_);
  Stmt s(db_, (std::string("SELECT ") + kArtifactCols +
               " FROM artifacts WHERE patient_id = ? ORDER BY created_at, rowid").c_str());
  s.bind(1, patient_id);
  while (s.step()) {
    auto a = read_artifact(s);
    if (!kind || a.kind == *kind) out.push_back(std::move(a));
  }
  return out;
}

std::vector<StoredArtifact> Store::children_of(const std::string& parent_id) const {
  std::vector<StoredArtifact> out;
  std::lock_guard lock(mu_);
  Stmt s(db_, (std::string("SELECT ") + kArtifactCols +
               " FROM artifacts WHERE parent_id = ? ORDER BY created_at, rowid").c_str());
  s.bind(1, parent_id);
  while (s.step()) out.push_back(read_artifact(s));
  return out;
}

std::vector<StoredArtifact> Store::all_artifacts() const {
  std::vector<StoredArtifact> out;
  std::lock_guard lock(mu_);
  Stmt s(db_, (std::string("SELECT ") + kArtifactCols + " FROM artifacts ORDER BY rowid").c_str());
  while (s.step()) out.push_back(read_artifact(s));
  return out;
}

}  // namespace eegcare::gateway
