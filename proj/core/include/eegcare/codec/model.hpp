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

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace eegcare::codec {

// Sample width of the data area, selected by the version marker.
// kEdf16: "0" version, 2-byte samples. kBdf24: 0xFF "BIOSEMI", 3-byte samples.
enum class SampleWidth { kEdf16, kBdf24 };

// Continuity flag stored in the reserved header field.
// kPlain files carry no annotation signal.
enum class Continuity { kPlain, kContinuous, kDiscontinuous };

inline constexpr std::string_view kEdfAnnotationsLabel = "EDF Annotations";
inline constexpr std::string_view kBdfAnnotationsLabel = "BDF Annotations";
inline constexpr int kDefaultAnnotationSamplesPerRecord = 20;

constexpr int bytes_per_sample(SampleWidth w) {
  return w == SampleWidth::kEdf16 ? 2 : 3;
}
constexpr std::int32_t format_digital_min(SampleWidth w) {
  return w == SampleWidth::kEdf16 ? -32768 : -8388608;
}
constexpr std::int32_t format_digital_max(SampleWidth w) {
  return w == SampleWidth::kEdf16 ? 32767 : 8388607;
}
std::string_view annotations_label(SampleWidth w);

struct FileHeader {
  SampleWidth width = SampleWidth::kBdf24;
  std::string patient_id;    // 80 chars max
  std::string recording_id;  // 80 chars max
  std::string start_date = "01.01.00";  // dd.mm.yy
  std::string start_time = "00.00.00";  // hh.mm.ss
  Continuity continuity = Continuity::kContinuous;
  // -1 marks a file that is still being written.
  std::int64_t record_count = 0;
  double record_duration = 1.0;  // seconds

  bool operator==(const FileHeader&) const = default;
};

struct SignalHeader {
  std::string label;               // 16 chars max
  std::string transducer;          // 80 chars max
  std::string physical_dimension;  // 8 chars max
  double physical_min = -1.0;
  double physical_max = 1.0;
  std::int32_t digital_min = -32768;
  std::int32_t digital_max = 32767;
  std::string prefiltering;  // 80 chars max
  std::int32_t samples_per_record = 1;

  bool operator==(const SignalHeader&) const = default;
};

struct Annotation {
  double onset = 0.0;  // seconds from file start
  std::optional<double> duration;
  std::vector<std::string> texts;

  bool operator==(const Annotation&) const = default;
};

// One data record: per ordinary signal, exactly samples_per_record digital
// values. The annotation signal is not stored here; its content is derived
// from SignalFileModel::annotations.
using DataRecord = std::vector<std::vector<std::int32_t>>;

// In-memory EDF / EDF+ / BDF / BDF+ file.
//
// `signals` lists ordinary signals only. Files with continuity other than
// kPlain additionally carry one annotation signal, written after the
// ordinary signals with `annotation_samples_per_record` samples per record.
struct SignalFileModel {
  FileHeader header;
  std::vector<SignalHeader> signals;
  std::vector<DataRecord> records;
  std::vector<Annotation> annotations;
  std::int32_t annotation_samples_per_record = kDefaultAnnotationSamplesPerRecord;
  // Start time of each record. Only used for discontinuous files; empty
  // means records are contiguous (record r starts at r * record_duration).
  std::vector<double> record_starts;

  bool operator==(const SignalFileModel&) const = default;

  bool has_annotation_signal() const {
    return header.continuity != Continuity::kPlain;
  }
  // Total signals in the header, annotation signal included.
  int signal_count() const {
    return static_cast<int>(signals.size()) + (has_annotation_signal() ? 1 : 0);
  }
  std::int64_t header_byte_count() const { return 256LL * (signal_count() + 1); }
  std::int64_t record_byte_count() const;
  double record_start(std::size_t r) const;
};

// A single diagnostic. `offset` is the byte offset of the offending field in
// the encoded file, or -1 when no single offset applies.
struct Finding {
  std::string code;
  std::string field;
  std::int64_t offset = -1;
  std::string message;

  std::string to_string() const;
};

class CodecError : public std::runtime_error {
 public:
  explicit CodecError(std::vector<Finding> findings);
  const std::vector<Finding>& findings() const { return findings_; }

 private:
  std::vector<Finding> findings_;
};

}  // namespace eegcare::codec
