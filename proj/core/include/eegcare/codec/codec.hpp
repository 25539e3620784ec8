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
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "eegcare/codec/model.hpp"

namespace eegcare::codec {

using Bytes = std::vector<std::uint8_t>;

// Serializes `model`. Throws CodecError carrying every validation finding
// when the model cannot be written as a standards-compliant file.
Bytes encode_file(const SignalFileModel& model);

// Parses a complete file. A record count of -1 is accepted; the records are
// then counted from the file length. Throws CodecError with offset-bearing
// findings, including the last complete record index for truncated files.
SignalFileModel decode_file(std::span<const std::uint8_t> bytes);

// Empty iff encode_file(model) succeeds and the continuity rules hold.
std::vector<Finding> validate(const SignalFileModel& model);

// Sets header.record_count from the number of records held.
void finalize_record_count(SignalFileModel& model);

Bytes read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

// Appends records to a file on disk as they arrive. The header is written
// with record count -1 and patched when finish() runs. One writer per file.
class RecordStreamWriter {
 public:
  // `layout` supplies header, signals and annotation sizing; its records and
  // annotations are ignored.
  RecordStreamWriter(const std::string& path, SignalFileModel layout);
  ~RecordStreamWriter();
  RecordStreamWriter(const RecordStreamWriter&) = delete;
  RecordStreamWriter& operator=(const RecordStreamWriter&) = delete;

  // `annotations` must fit in this record's annotation signal.
  void append(const DataRecord& record, std::span<const Annotation> annotations = {});
  // Rewrites the record count and closes the file. Returns records written.
  std::int64_t finish();
  std::int64_t records_written() const { return written_; }

 private:
  SignalFileModel layout_;
  std::ofstream out_;
  std::int64_t written_ = 0;
  bool finished_ = false;
};

}  // namespace eegcare::codec
