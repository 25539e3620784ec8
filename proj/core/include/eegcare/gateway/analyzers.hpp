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

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegcare/codec/model.hpp"

namespace eegcare::gateway {

struct Measurement {
  double value = 0.0;
  std::string units;
};

struct ChannelResult {
  std::string channel;
  std::map<std::string, Measurement> values;
};

class Analyzer {
 public:
  virtual ~Analyzer() = default;
  virtual std::string id() const = 0;
  virtual std::string version() const = 0;
  virtual std::vector<ChannelResult> run(const codec::SignalFileModel& file) const = 0;
};

// "channel-stats": mean, RMS, min and max per channel in physical units.
// Samples inside GAP and PAD annotations are zero fill and are skipped.
class ChannelStatsAnalyzer : public Analyzer {
 public:
  std::string id() const override { return "channel-stats"; }
  std::string version() const override { return "1.0"; }
  std::vector<ChannelResult> run(const codec::SignalFileModel& file) const override;
};

class AnalyzerRegistry {
 public:
  void add(std::unique_ptr<Analyzer> analyzer);
  const Analyzer* find(const std::string& id) const;
  std::vector<const Analyzer*> list() const;

  static AnalyzerRegistry with_defaults();

 private:
  std::map<std::string, std::unique_ptr<Analyzer>> analyzers_;
};

nlohmann::json to_json(const std::vector<ChannelResult>& results);

}  // namespace eegcare::gateway
