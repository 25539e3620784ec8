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

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "eegcare/codec/codec.hpp"
#include "eegcare/codec/identity.hpp"
#include "eegcare/recording/session.hpp"

namespace eegcare::recording {

inline constexpr std::string_view kGapAnnotation = "GAP";
inline constexpr std::string_view kPadAnnotation = "PAD";

struct FinalizeOptions {
  // Default: EDF+ when the device resolution fits 16 bits, BDF+ otherwise.
  std::optional<codec::SampleWidth> width;
  codec::PatientIdentity patient;
  bool anonymize = false;
  std::string technician;
  // Recording start; defaults to the session's start-recording time.
  std::optional<std::chrono::system_clock::time_point> start;
};

struct FinalizedRecording {
  codec::SignalFileModel model;
  codec::Bytes bytes;
  nlohmann::json metadata;
};

// Lays the received frames on the stream timeline in 1-s data records.
// Missing frames are zero-filled (digital value of 0 physical units) and
// annotated "GAP"; the unfilled tail of the last record is annotated "PAD".
// Quality events become "QUALITY <kind> <channel> <severity>" annotations.
// Requires state Finalizing and moves the session to Complete. Throws
// SessionError when nothing was recorded.
FinalizedRecording finalize_session(RecordingSession& session, const FinalizeOptions& options = {});

}  // namespace eegcare::recording
