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

#include "eegcare/recording/view.hpp"

#include <algorithm>
#include <stdexcept>

namespace eegcare::recording {

std::vector<MinMax> decimate_for_view(std::span<const double> values, std::size_t n) {
  if (n == 0) throw std::invalid_argument("target point count must be at least 1");
  std::vector<MinMax> out;
  if (values.empty()) return out;
  const std::size_t size = values.size();
  const std::size_t k = std::min(n, size);
  out.reserve(k);
  for (std::size_t b = 0; b < k; ++b) {
    const std::size_t lo = b * size / k;
    const std::size_t hi = (b + 1) * size / k;
    const auto [mn, mx] = std::minmax_element(values.begin() + lo, values.begin() + hi);
    out.push_back({*mn, *mx});
  }
  return out;
}

nlohmann::json to_json(const ViewFrame& v) {
  nlohmann::json channels = nlohmann::json::array();
  for (std::size_t c = 0; c < v.channels.size(); ++c) {
    nlohmann::json mins = nlohmann::json::array();
    nlohmann::json maxs = nlohmann::json::array();
    for (const auto& p : v.channels[c]) {
      mins.push_back(p.min);
      maxs.push_back(p.max);
    }
    channels.push_back({{"label", c < v.labels.size() ? v.labels[c] : ""}, {"min", mins}, {"max", maxs}});
  }
  return {{"state", v.state},
          {"t_end", v.t_end},
          {"window", v.window},
          {"channels", channels},
          {"frames_received", v.frames_received},
          {"frames_missing", v.frames_missing}};
}

}  // namespace eegcare::recording
