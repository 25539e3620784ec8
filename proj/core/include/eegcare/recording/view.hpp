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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace eegcare::recording {

struct MinMax {
  double min = 0.0;
  double max = 0.0;

  bool operator==(const MinMax&) const = default;
};

// Splits `values` into min(n, size) contiguous buckets of near-equal length
// (bucket b covers [b * size / k, (b + 1) * size / k)) and reports each
// bucket's extremes. Throws std::invalid_argument when n is 0.
std::vector<MinMax> decimate_for_view(std::span<const double> values, std::size_t n);

struct ViewFrame {
  std::string state;
  double t_end = 0.0;   // s of stream timeline at the newest sample
  double window = 0.0;  // s requested
  std::vector<std::string> labels;
  std::vector<std::vector<MinMax>> channels;
  std::uint64_t frames_received = 0;
  std::uint64_t frames_missing = 0;
};

nlohmann::json to_json(const ViewFrame& v);

}  // namespace eegcare::recording
