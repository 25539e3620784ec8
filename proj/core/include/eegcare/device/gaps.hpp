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
#include <span>
#include <vector>

namespace eegcare::device {

struct SequenceGap {
  std::uint16_t after = 0;    // last sequence received before the gap
  std::uint32_t missing = 0;  // packets skipped

  bool operator==(const SequenceGap&) const = default;
};

// Follows a stream of 16-bit packet counters and maps them onto an unwrapped
// 64-bit packet index. 65535 -> 0 is contiguous; a repeated counter is a
// duplicate and is ignored.
class SequenceTracker {
 public:
  struct Step {
    std::uint64_t index = 0;  // unwrapped index of this packet
    std::uint32_t missing = 0;
    bool duplicate = false;
  };

  // The first packet's index is its counter value: streams start at 0.
  Step observe(std::uint16_t sequence);

  bool started() const { return started_; }
  std::uint64_t next_index() const { return started_ ? last_index_ + 1 : 0; }
  std::uint64_t received() const { return received_; }

 private:
  bool started_ = false;
  std::uint16_t last_ = 0;
  std::uint64_t last_index_ = 0;
  std::uint64_t received_ = 0;
};

// Every discontinuity in a received counter sequence, in order.
std::vector<SequenceGap> detect_gaps(std::span<const std::uint16_t> sequences);

}  // namespace eegcare::device
