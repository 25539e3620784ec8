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

#include "eegcare/codec/identity.hpp"

#include <array>
#include <cstdio>

namespace eegcare::codec {

namespace {

constexpr std::array<const char*, 12> kMonths = {"JAN", "FEB", "MAR", "APR", "MAY", "JUN",
                                                 "JUL", "AUG", "SEP", "OCT", "NOV", "DEC"};

std::string token(const std::string& s) {
  if (s.empty()) return "X";
  std::string out;
  for (char c : s) {
    const auto b = static_cast<unsigned char>(c);
    if (c == ' ') {
      out += '_';
    } else if (b >= 0x21 && b <= 0x7E) {
      out += c;
    } else {
      out += '?';
    }
  }
  return out;
}

std::string two(unsigned v) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%02u", v % 100);
  return buf;
}

}  // namespace

std::string format_edfplus_date(std::chrono::year_month_day d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02u-%s-%04d", static_cast<unsigned>(d.day()),
                kMonths[static_cast<unsigned>(d.month()) - 1], static_cast<int>(d.year()));
  return buf;
}

std::string format_patient_field(const PatientIdentity& p, bool anonymize) {
  const char sex = (p.sex == 'M' || p.sex == 'F') ? p.sex : 'X';
  std::string out = token(p.code);
  out += ' ';
  out += sex;
  out += ' ';
  out += p.birthdate ? format_edfplus_date(*p.birthdate) : "X";
  out += ' ';
  out += anonymize ? "X" : token(p.name);
  return out.substr(0, 80);
}

std::string format_recording_field(std::chrono::year_month_day start, const std::string& admin_code,
                                   const std::string& technician, const std::string& equipment) {
  std::string out = "Startdate " + format_edfplus_date(start);
  out += ' ' + token(admin_code) + ' ' + token(technician) + ' ' + token(equipment);
  return out.substr(0, 80);
}

std::string format_start_date(std::chrono::sys_seconds t) {
  const std::chrono::year_month_day d{std::chrono::floor<std::chrono::days>(t)};
  return two(static_cast<unsigned>(d.day())) + "." + two(static_cast<unsigned>(d.month())) + "." +
         two(static_cast<unsigned>(static_cast<int>(d.year())));
}

std::string format_start_time(std::chrono::sys_seconds t) {
  const auto day = std::chrono::floor<std::chrono::days>(t);
  const std::chrono::hh_mm_ss hms{t - day};
  return two(static_cast<unsigned>(hms.hours().count())) + "." +
         two(static_cast<unsigned>(hms.minutes().count())) + "." +
         two(static_cast<unsigned>(hms.seconds().count()));
}

}  // namespace eegcare::codec
