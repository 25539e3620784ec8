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

#include <chrono>
#include <optional>
#include <string>

namespace eegcare::codec {

// EDF+ structured patient field: "code sex birthdate name", each subfield a
// single token with 'X' for unknown.
struct PatientIdentity {
  std::string code;
  char sex = 'X';  // 'M', 'F' or 'X'
  std::optional<std::chrono::year_month_day> birthdate;
  std::string name;
};

// Spaces inside subfields become '_'. With `anonymize` the name is 'X'.
std::string format_patient_field(const PatientIdentity& patient, bool anonymize);

// "Startdate dd-MMM-yyyy admin technician equipment".
std::string format_recording_field(std::chrono::year_month_day start, const std::string& admin_code,
                                   const std::string& technician, const std::string& equipment);

// dd.mm.yy and hh.mm.ss header fields for a UTC instant.
std::string format_start_date(std::chrono::sys_seconds t);
std::string format_start_time(std::chrono::sys_seconds t);

// dd-MMM-yyyy as used inside the structured fields.
std::string format_edfplus_date(std::chrono::year_month_day d);

}  // namespace eegcare::codec
