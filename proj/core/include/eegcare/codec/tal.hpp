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
#include <span>
#include <string>
#include <vector>

#include "eegcare/codec/model.hpp"

namespace eegcare::codec {

inline constexpr std::uint8_t kTalOnsetEnd = 0x15;
inline constexpr std::uint8_t kTalTextEnd = 0x14;
inline constexpr std::uint8_t kTalEnd = 0x00;

// Time-stamped annotation lists:
//   "+<onset>[0x15<duration>]0x14<text>0x14...0x00"
// Each annotation becomes one TAL. Throws CodecError for non-finite onsets,
// negative durations and reserved bytes (0x00, 0x14, 0x15) inside a text.
std::vector<std::uint8_t> encode_tal(std::span<const Annotation> annotations);
std::string encode_tal_entry(const Annotation& annotation);

// Parses TALs until the end of `bytes` or a 0x00 where a TAL would start
// (record padding). `base_offset` is added to offsets in findings.
std::vector<Annotation> decode_tal(std::span<const std::uint8_t> bytes,
                                   std::int64_t base_offset = 0);

// Shortest decimal that reads back to the same double, never in exponent
// form. Negative zero prints as "0".
std::string format_decimal(double value);

}  // namespace eegcare::codec
