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

#include "eegcare/device/gaps.hpp"

namespace eegcare::device {

SequenceTracker::Step SequenceTracker::observe(std::uint16_t sequence) {
  Step step;
  if (!started_) {
    started_ = true;
    step.index = sequence;
    step.missing = sequence;
  } else {
    const auto delta = static_cast<std::uint16_t>(sequence - last_);
    if (delta == 0) {
      step.index = last_index_;
      step.duplicate = true;
      return step;
    }
    step.index = last_index_ + delta;
    step.missing = delta - 1u;
  }
  last_ = sequence;
  last_index_ = step.index;
  ++received_;
  return step;
}

std::vector<SequenceGap> detect_gaps(std::span<const std::uint16_t> sequences) {
  std::vector<SequenceGap> gaps;
  for (std::size_t i = 1; i < sequences.size(); ++i) {
    const auto delta = static_cast<std::uint16_t>(sequences[i] - sequences[i - 1]);
    if (delta > 1) gaps.push_back({sequences[i - 1], delta - 1u});
  }
  return gaps;
}

}  // namespace eegcare::device
