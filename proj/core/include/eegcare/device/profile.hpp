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
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegcare/codec/calibration.hpp"

namespace eegcare::device {

// Characteristic property bits, GATT style.
enum Property : std::uint8_t {
  kRead = 1 << 0,
  kWrite = 1 << 1,
  kNotify = 1 << 2,
};

// Fixed identifiers of the open EEG streaming service. Documented in
// docs/wire-protocol.md.
namespace uuids {
inline constexpr std::string_view kEegService = "8f1d0000-6c7b-4d2e-9a51-3e0b7c4f2a10";
inline constexpr std::string_view kControlPoint = "8f1d0001-6c7b-4d2e-9a51-3e0b7c4f2a10";
inline constexpr std::string_view kSampleStream = "8f1d0002-6c7b-4d2e-9a51-3e0b7c4f2a10";
inline constexpr std::string_view kConfiguration = "8f1d0003-6c7b-4d2e-9a51-3e0b7c4f2a10";
inline constexpr std::string_view kChannelMap = "8f1d0004-6c7b-4d2e-9a51-3e0b7c4f2a10";
inline constexpr std::string_view kBatteryService = "0000180f-0000-1000-8000-00805f9b34fb";
inline constexpr std::string_view kBatteryLevel = "00002a19-0000-1000-8000-00805f9b34fb";
}  // namespace uuids

struct Characteristic {
  std::string uuid;
  std::string name;
  std::uint8_t properties = 0;

  bool operator==(const Characteristic&) const = default;
};

struct Service {
  std::string uuid;
  std::string name;
  std::vector<Characteristic> characteristics;

  bool operator==(const Service&) const = default;
};

struct PeripheralProfile {
  std::string name;
  std::vector<Service> services;
  int channel_count = 0;
  std::vector<std::string> electrode_labels;
  std::vector<int> supported_rates;  // Hz, ascending
  int resolution_bits = 24;          // 12 or 24
  int samples_per_packet = 12;
  // Default calibration written into recordings.
  double physical_min = -1.0;
  double physical_max = 1.0;
  std::string physical_dimension = "uV";
  std::string transducer;
  std::string prefiltering;

  bool operator==(const PeripheralProfile&) const = default;

  std::int32_t digital_min() const { return -(std::int32_t{1} << (resolution_bits - 1)); }
  std::int32_t digital_max() const { return (std::int32_t{1} << (resolution_bits - 1)) - 1; }
  codec::Calibration calibration() const {
    return {physical_min, physical_max, digital_min(), digital_max()};
  }
  int max_rate() const { return supported_rates.empty() ? 0 : supported_rates.back(); }
};

struct DeviceConfig {
  int rate = 0;  // Hz
  int resolution_bits = 0;
  std::vector<std::string> active_channels;
  int samples_per_packet = 0;  // 0 = profile default

  bool operator==(const DeviceConfig&) const = default;
};

class ProfileError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws ProfileError when the invariants (label count, non-empty rates,
// 12/24-bit resolution, positive packet size, usable calibration) fail.
void check_profile(const PeripheralProfile& profile);

struct BuiltinProfiles {
  PeripheralProfile muse_like;
  PeripheralProfile biopot_like;
};

// muse-like: 4 ch (TP9, AF7, AF9, TP10), 256 Hz, 12-bit.
// biopot-like: 8 ch, 250/500/1000/2000 Hz, 24-bit.
const BuiltinProfiles& builtin_profiles();

// "muse-like" or "biopot-like"; throws ProfileError otherwise.
PeripheralProfile find_builtin_profile(std::string_view name);

// Keeps a supported rate; otherwise the nearest supported rate below the
// request, else the lowest supported. Active channels are intersected with
// the profile labels in profile order; an empty request selects all
// channels. Throws ProfileError on an empty intersection.
DeviceConfig negotiate_config(const DeviceConfig& requested, const PeripheralProfile& profile);

DeviceConfig default_config(const PeripheralProfile& profile);

// Indices into profile.electrode_labels of config.active_channels.
std::vector<int> active_channel_indices(const DeviceConfig& config, const PeripheralProfile& profile);

nlohmann::json to_json(const PeripheralProfile& profile);
PeripheralProfile profile_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DeviceConfig& config);
DeviceConfig config_from_json(const nlohmann::json& j);

}  // namespace eegcare::device
