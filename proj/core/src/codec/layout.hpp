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

// Byte layout of the EDF/BDF header, shared by the encoder, decoder and
// validator.

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "eegcare/codec/model.hpp"

namespace eegcare::codec::layout {

struct FixedField {
  std::string_view name;
  std::int64_t offset;
  std::int64_t width;
};

inline constexpr FixedField kVersion{"version", 0, 8};
inline constexpr FixedField kPatientId{"patient-id", 8, 80};
inline constexpr FixedField kRecordingId{"recording-id", 88, 80};
inline constexpr FixedField kStartDate{"start-date", 168, 8};
inline constexpr FixedField kStartTime{"start-time", 176, 8};
inline constexpr FixedField kHeaderBytes{"header-byte-count", 184, 8};
inline constexpr FixedField kReserved{"reserved", 192, 44};
inline constexpr FixedField kRecordCount{"record-count", 236, 8};
inline constexpr FixedField kRecordDuration{"record-duration", 244, 8};
inline constexpr FixedField kSignalCount{"signal-count", 252, 4};

enum SignalField : int {
  kLabel = 0,
  kTransducer,
  kPhysicalDimension,
  kPhysicalMin,
  kPhysicalMax,
  kDigitalMin,
  kDigitalMax,
  kPrefiltering,
  kSamplesPerRecord,
  kSignalReserved,
  kSignalFieldCount,
};

inline constexpr std::array<std::int64_t, kSignalFieldCount> kSignalWidths = {
    16, 80, 8, 8, 8, 8, 8, 80, 8, 32};
inline constexpr std::array<std::string_view, kSignalFieldCount> kSignalNames = {
    "label",      "transducer", "physical-dimension", "physical-min",       "physical-max",
    "digital-min", "digital-max", "prefiltering",     "samples-per-record", "reserved"};

inline std::int64_t signal_field_offset(SignalField field, int signal_index, int signal_count) {
  std::int64_t off = 256;
  for (int k = 0; k < field; ++k) off += kSignalWidths[static_cast<std::size_t>(k)] * signal_count;
  return off + kSignalWidths[static_cast<std::size_t>(field)] * signal_index;
}

inline std::string signal_field_name(SignalField field, int signal_index) {
  return "signal[" + std::to_string(signal_index) + "]." +
         std::string(kSignalNames[static_cast<std::size_t>(field)]);
}

inline bool printable_ascii(std::string_view s) {
  for (char c : s) {
    const auto b = static_cast<unsigned char>(c);
    if (b < 0x20 || b > 0x7E) return false;
  }
  return true;
}

}  // namespace eegcare::codec::layout
