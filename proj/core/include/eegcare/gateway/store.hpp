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

// Patient records and artifact links in one SQLite database. Blob content
// lives in a BlobStore; artifacts only carry its hash.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

struct sqlite3;

namespace eegcare::gateway {

struct PatientRecord {
  std::string id;
  std::string name;
  std::optional<std::chrono::year_month_day> birth_date;
  char sex = 'X';  // sex at birth: 'F', 'M' or 'X'
  std::chrono::sys_seconds created_at{};
  bool archived = false;
  std::int64_t version = 0;

  bool operator==(const PatientRecord&) const = default;
};

struct PatientPatch {
  std::optional<std::string> name;
  std::optional<std::optional<std::chrono::year_month_day>> birth_date;
  std::optional<char> sex;
  std::optional<bool> archived;
};

enum class ArtifactKind { kRecording, kResponse, kReport };
std::string_view to_string(ArtifactKind k);
std::optional<ArtifactKind> artifact_kind_from(std::string_view s);

struct StoredArtifact {
  std::string id;
  std::string patient_id;
  ArtifactKind kind = ArtifactKind::kRecording;
  std::string parent_id;  // reports: the analyzed recording
  std::string hash;
  std::int64_t size = 0;
  std::chrono::sys_seconds created_at{};
  nlohmann::json metadata = nlohmann::json::object();
};

class StoreError : public std::runtime_error {
 public:
  enum class Code { kNotFound, kConflict, kInvalid, kPrecondition };
  StoreError(Code code, const std::string& what) : std::runtime_error(what), code(code) {}
  Code code;
};

nlohmann::json to_json(const PatientRecord& p);
nlohmann::json to_json(const StoredArtifact& a);
std::string format_date(std::chrono::year_month_day d);
std::optional<std::chrono::year_month_day> parse_date(const std::string& s);

class Store {
 public:
  // ":memory:" for a private in-memory database.
  explicit Store(const std::filesystem::path& db_path);
  ~Store();
  Store(const Store&) = delete;
  Store& operator=(const Store&) = delete;

  // An empty id is generated. Throws kConflict for an existing id and
  // kInvalid for an empty name, future birth date or unknown sex.
  PatientRecord create_patient(PatientRecord draft);
  std::optional<PatientRecord> get_patient(const std::string& id) const;
  // Case-insensitive prefix of any word of the name, or the exact id.
  // An empty query lists every patient.
  std::vector<PatientRecord> search_patients(const std::string& query, bool include_archived = false) const;
  // With expected_version set, fails with kPrecondition unless it matches.
  PatientRecord update_patient(const std::string& id, const PatientPatch& patch,
                               std::optional<std::int64_t> expected_version = std::nullopt);
  // Refused with kConflict while artifacts reference the patient.
  void delete_patient(const std::string& id);

  // Fills id and created_at. The patient must exist and not be archived.
  StoredArtifact add_artifact(StoredArtifact artifact);
  std::optional<StoredArtifact> get_artifact(const std::string& id) const;
  std::vector<StoredArtifact> artifacts_for(const std::string& patient_id,
                                            std::optional<ArtifactKind> kind = std::nullopt) const;
  std::vector<StoredArtifact> children_of(const std::string& parent_id) const;
  std::vector<StoredArtifact> all_artifacts() const;

 private:
  void exec(const char* sql);
  void check_patient_fields(const PatientRecord& p) const;

  mutable std::mutex mu_;
  sqlite3* db_ = nullptr;
};

}  // namespace eegcare::gateway
