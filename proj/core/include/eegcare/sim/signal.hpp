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

// Synthetic EEG stimulus.
//
// White noise is a pure function of (seed, channel, component, sample index):
// the index is hashed with SplitMix64 and mapped to a standard normal with
// Box-Muller. Chunk boundaries therefore never change the output.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "eegcare/codec/calibration.hpp"
#include "eegcare/device/profile.hpp"

namespace eegcare::sim {

enum class Waveform { kSine, kConstant, kWhiteNoise };

std::string_view waveform_name(Waveform w);

struct Component {
  Waveform waveform = Waveform::kSine;
  double amplitude = 0.0;  // uV; standard deviation for white noise
  double frequency = 0.0;  // Hz, sine only
  double phase = 0.0;      // rad, sine only

  bool operator==(const Component&) const = default;
};

struct SignalSpec {
  // One entry per active channel, or a single entry applied to all of them.
  std::vector<std::vector<Component>> channels;
  std::uint64_t seed = 0;

  bool operator==(const SignalSpec&) const = default;

  const std::vector<Component>& channel(std::size_t i) const {
    return channels.size() == 1 ? channels.front() : channels.at(i);
  }
};

class SignalError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// 10 Hz alpha-band sine plus low-level noise.
SignalSpec default_signal_spec(std::uint64_t seed = 0);

// Throws SignalError on negative amplitudes, a channel-count mismatch, or a
// sine at or above Nyquist.
void check_signal_spec(const SignalSpec& spec, int channel_count, int rate);

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

// Standard normal deviate for one noise sample.
double noise_sample(std::uint64_t seed, std::size_t channel, std::size_t component,
                    std::uint64_t index);

double physical_value(const SignalSpec& spec, std::size_t channel, int rate, std::uint64_t index);

// result[c][i] is the digital sample t0 + i of active channel c.
std::vector<std::vector<std::int32_t>> generate_samples(const SignalSpec& spec,
                                                        const device::DeviceConfig& config,
                                                        const codec::Calibration& calibration,
                                                        std::uint64_t t0, std::size_t n);

nlohmann::json to_json(const SignalSpec& spec);
SignalSpec signal_spec_from_json(const nlohmann::json& j);

}  // namespace eegcare::sim
