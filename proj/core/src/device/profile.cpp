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

#include "eegcare/device/profile.hpp"

#include <algorithm>

namespace eegcare::device {

namespace {

std::vector<Service> eeg_services() {
  return {
      Service{std::string(uuids::kEegService),
              "EEG Streaming",
              {
                  {std::string(uuids::kControlPoint), "Control Point", kWrite},
                  {std::string(uuids::kSampleStream), "Sample Stream", kNotify},
                  {std::string(uuids::kConfiguration), "Configuration", kRead | kWrite},
                  {std::string(uuids::kChannelMap), "Channel Map", kRead},
              }},
      Service{std::string(uuids::kBatteryService),
              "Battery",
              {{std::string(uuids::kBatteryLevel), "Battery Level", kRead | kNotify}}},
  };
}

BuiltinProfiles make_builtins() {
  BuiltinProfiles b;

  auto& muse = b.muse_like;
  muse.name = "muse-like";
  muse.services = eeg_services();
  muse.channel_count = 4;
  muse.electrode_labels = {"TP9", "AF7", "AF9", "TP10"};
  muse.supported_rates = {256};
  muse.resolution_bits = 12;
  muse.samples_per_packet = 12;
  // 0.5 uV per step, digital 0 maps to 0 uV.
  muse.physical_min = -1024;
  muse.physical_max = 1023.5;
  muse.transducer = "Dry electrode";

  auto& biopot = b.biopot_like;
  biopot.name = "biopot-like";
  biopot.services = eeg_services();
  biopot.channel_count = 8;
  biopot.electrode_labels = {"Fp1", "Fp2", "C3", "C4", "P3", "P4", "O1", "O2"};
  biopot.supported_rates = {250, 500, 1000, 2000};
  biopot.resolution_bits = 24;
  biopot.samples_per_packet = 10;
  biopot.physical_min = -187500;
  biopot.physical_max = 187500;
  biopot.transducer = "AgAgCl electrode";
  return b;
}

const char* property_name(std::uint8_t bit) {
  switch (bit) {
    case kRead:
      return "read";
    case kWrite:
      return "write";
    case kNotify:
      return "notify";
  }
  return "?";
}

}  // namespace

void check_profile(const PeripheralProfile& p) {
  if (p.channel_count < 1) throw ProfileError("profile " + p.name + ": channel-count must be >= 1");
  if (static_cast<int>(p.electrode_labels.size()) != p.channel_count) {
    throw ProfileError("profile " + p.name + ": electrode label count != channel-count");
  }
  if (p.supported_rates.empty()) throw ProfileError("profile " + p.name + ": no supported rates");
  if (!std::is_sorted(p.supported_rates.begin(), p.supported_rates.end()) ||
      std::adjacent_find(p.supported_rates.begin(), p.supported_rates.end()) != p.supported_rates.end() ||
      p.supported_rates.front() <= 0) {
    throw ProfileError("profile " + p.name + ": rates must be positive, ascending and unique");
  }
  if (p.resolution_bits != 12 && p.resolution_bits != 24) {
    throw ProfileError("profile " + p.name + ": resolution must be 12 or 24 bits");
  }
  if (p.samples_per_packet < 1) throw ProfileError("profile " + p.name + ": samples-per-packet must be >= 1");
  if (p.calibration().degenerate()) throw ProfileError("profile " + p.name + ": degenerate calibration");
}

const BuiltinProfiles& builtin_profiles() {
  static const BuiltinProfiles profiles = make_builtins();
  return profiles;
}

PeripheralProfile find_builtin_profile(std::string_view name) {
  const auto& b = builtin_profiles();
  if (name == b.muse_like.name) return b.muse_like;
  if (name == b.biopot_like.name) return b.biopot_like;
  throw ProfileError("unknown profile '" + std::string(name) + "'");
}

DeviceConfig negotiate_config(const DeviceConfig& requested, const PeripheralProfile& profile) {
  DeviceConfig out;
  const auto& rates = profile.supported_rates;
  if (std::find(rates.begin(), rates.end(), requested.rate) != rates.end()) {
    out.rate = requested.rate;
  } else {
    auto below = std::lower_bound(rates.begin(), rates.end(), requested.rate);
    out.rate = below == rates.begin() ? rates.front() : *std::prev(below);
  }
  out.resolution_bits = profile.resolution_bits;
  out.samples_per_packet =
      requested.samples_per_packet > 0 ? requested.samples_per_packet : profile.samples_per_packet;

  if (requested.active_channels.empty()) {
    out.active_channels = profile.electrode_labels;
  } else {
    for (const auto& label : profile.electrode_labels) {
      if (std::find(requested.active_channels.begin(), requested.active_channels.end(), label) !=
          requested.active_channels.end()) {
        out.active_channels.push_back(label);
      }
    }
    if (out.active_channels.empty()) {
      throw ProfileError("no requested channel is available on " + profile.name);
    }
  }
  return out;
}

DeviceConfig default_config(const PeripheralProfile& profile) {
  return negotiate_config(DeviceConfig{profile.max_rate(), profile.resolution_bits, {}, 0}, profile);
}

std::vector<int> active_channel_indices(const DeviceConfig& config, const PeripheralProfile& profile) {
  std::vector<int> out;
  for (const auto& label : config.active_channels) {
    const auto it = std::find(profile.electrode_labels.begin(), profile.electrode_labels.end(), label);
    if (it == profile.electrode_labels.end()) throw ProfileError("unknown channel " + label);
    out.push_back(static_cast<int>(it - profile.electrode_labels.begin()));
  }
  return out;
}

nlohmann::json to_json(const PeripheralProfile& p) {
  nlohmann::json services = nlohmann::json::array();
  for (const auto& s : p.services) {
    nlohmann::json chars = nlohmann::json::array();
    for (const auto& c : s.characteristics) {
      nlohmann::json props = nlohmann::json::array();
      for (std::uint8_t bit : {kRead, kWrite, kNotify}) {
        if (c.properties & bit) props.push_back(property_name(bit));
      }
      chars.push_back({{"uuid", c.uuid}, {"name", c.name}, {"properties", props}});
    }
    services.push_back({{"uuid", s.uuid}, {"name", s.name}, {"characteristics", chars}});
  }
  return {
      {"name", p.name},
      {"services", services},
      {"channel_count", p.channel_count},
      {"electrode_labels", p.electrode_labels},
      {"supported_rates", p.supported_rates},
      {"resolution_bits", p.resolution_bits},
      {"samples_per_packet", p.samples_per_packet},
      {"physical_min", p.physical_min},
      {"physical_max", p.physical_max},
      {"physical_dimension", p.physical_dimension},
      {"transducer", p.transducer},
      {"prefiltering", p.prefiltering},
  };
}

PeripheralProfile profile_from_json(const nlohmann::json& j) {
  PeripheralProfile p;
  // A profile file may start from a builtin and override fields.
  if (j.contains("base")) p = find_builtin_profile(j.at("base").get<std::string>());
  if (j.contains("name")) p.name = j.at("name").get<std::string>();
  if (j.contains("services")) {
    p.services.clear();
    for (const auto& s : j.at("services")) {
      Service svc{s.at("uuid").get<std::string>(), s.value("name", ""), {}};
      for (const auto& c : s.value("characteristics", nlohmann::json::array())) {
        Characteristic ch{c.at("uuid").get<std::string>(), c.value("name", ""), 0};
        for (const auto& prop : c.value("properties", nlohmann::json::array())) {
          const auto name = prop.get<std::string>();
          if (name == "read") {
            ch.properties |= kRead;
          } else if (name == "write") {
            ch.properties |= kWrite;
          } else if (name == "notify") {
            ch.properties |= kNotify;
          } else {
            throw ProfileError("unknown characteristic property '" + name + "'");
          }
        }
        svc.characteristics.push_back(std::move(ch));
      }
      p.services.push_back(std::move(svc));
    }
  }
  if (j.contains("electrode_labels")) {
    p.electrode_labels = j.at("electrode_labels").get<std::vector<std::string>>();
    p.channel_count = static_cast<int>(p.electrode_labels.size());
  }
  if (j.contains("channel_count")) p.channel_count = j.at("channel_count").get<int>();
  if (j.contains("supported_rates")) {
    p.supported_rates = j.at("supported_rates").get<std::vector<int>>();
    std::sort(p.supported_rates.begin(), p.supported_rates.end());
  }
  if (j.contains("resolution_bits")) p.resolution_bits = j.at("resolution_bits").get<int>();
  if (j.contains("samples_per_packet")) p.samples_per_packet = j.at("samples_per_packet").get<int>();
  if (j.contains("physical_min")) p.physical_min = j.at("physical_min").get<double>();
  if (j.contains("physical_max")) p.physical_max = j.at("physical_max").get<double>();
  if (j.contains("physical_dimension")) p.physical_dimension = j.at("physical_dimension").get<std::string>();
  if (j.contains("transducer")) p.transducer = j.at("transducer").get<std::string>();
  if (j.contains("prefiltering")) p.prefiltering = j.at("prefiltering").get<std::string>();
  check_profile(p);
  return p;
}

nlohmann::json to_json(const DeviceConfig& c) {
  return {{"rate", c.rate},
          {"resolution_bits", c.resolution_bits},
          {"active_channels", c.active_channels},
          {"samples_per_packet", c.samples_per_packet}};
}

DeviceConfig config_from_json(const nlohmann::json& j) {
  DeviceConfig c;
  c.rate = j.value("rate", 0);
  c.resolution_bits = j.value("resolution_bits", 0);
  c.active_channels = j.value("active_channels", std::vector<std::string>{});
  c.samples_per_packet = j.value("samples_per_packet", 0);
  return c;
}

}  // namespace eegcare::device
