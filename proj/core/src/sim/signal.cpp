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

#include "eegcare/sim/signal.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace eegcare::sim {

std::string_view waveform_name(Waveform w) {
  switch (w) {
    case Waveform::kSine:
      return "sine";
    case Waveform::kConstant:
      return "constant";
    case Waveform::kWhiteNoise:
      return "white-noise";
  }
  return "?";
}

namespace {

Waveform parse_waveform(const std::string& name) {
  if (name == "sine") return Waveform::kSine;
  if (name == "constant") return Waveform::kConstant;
  if (name == "white-noise" || name == "noise") return Waveform::kWhiteNoise;
  throw SignalError("unknown waveform '" + name + "'");
}

double unit_open(std::uint64_t bits) {
  // (0, 1]
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

SignalSpec default_signal_spec(std::uint64_t seed) {
  SignalSpec s;
  s.seed = seed;
  s.channels = {{{Waveform::kSine, 20.0, 10.0, 0.0}, {Waveform::kWhiteNoise, 5.0, 0.0, 0.0}}};
  return s;
}

void check_signal_spec(const SignalSpec& spec, int channel_count, int rate) {
  if (spec.channels.empty()) throw SignalError("signal spec has no channels");
  if (spec.channels.size() != 1 && spec.channels.size() != static_cast<std::size_t>(channel_count)) {
    throw SignalError("signal spec has " + std::to_string(spec.channels.size()) +
                      " channel entries for " + std::to_string(channel_count) + " active channels");
  }
  for (const auto& comps : spec.channels) {
    for (const auto& c : comps) {
      if (!(c.amplitude >= 0.0) || !std::isfinite(c.amplitude)) {
        throw SignalError("component amplitude must be finite and >= 0");
      }
      if (c.waveform == Waveform::kSine) {
        if (!(c.frequency >= 0.0) || c.frequency >= rate / 2.0) {
          throw SignalError("sine frequency " + std::to_string(c.frequency) +
                            " Hz is not below Nyquist (" + std::to_string(rate / 2.0) + " Hz)");
        }
      }
    }
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double noise_sample(std::uint64_t seed, std::size_t channel, std::size_t component,
                    std::uint64_t index) {
  const std::uint64_t key = splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(channel) << 32) |
                                                         static_cast<std::uint64_t>(component)));
  const std::uint64_t a = splitmix64(key ^ (index * 2));
  const std::uint64_t b = splitmix64(key ^ (index * 2 + 1));
  return std::sqrt(-2.0 * std::log(unit_open(a))) * std::cos(2.0 * std::numbers::pi * unit_open(b));
}

double physical_value(const SignalSpec& spec, std::size_t channel, int rate, std::uint64_t index) {
  const double t = static_cast<double>(index) / rate;
  const auto& comps = spec.channel(channel);
  double v = 0.0;
  for (std::size_t k = 0; k < comps.size(); ++k) {
    const auto& c = comps[k];
    switch (c.waveform) {
      case Waveform::kSine:
        v += c.amplitude * std::sin(2.0 * std::numbers::pi * c.frequency * t + c.phase);
        break;
      case Waveform::kConstant:
        v += c.amplitude;
        break;
      case Waveform::kWhiteNoise:
        v += c.amplitude * noise_sample(spec.seed, channel, k, index);
        break;
    }
  }
  return v;
}

std::vector<std::vector<std::int32_t>> generate_samples(const SignalSpec& spec,
                                                        const device::DeviceConfig& config,
                                                        const codec::Calibration& calibration,
                                                        std::uint64_t t0, std::size_t n) {
  const auto channels = config.active_channels.size();
  check_signal_spec(spec, static_cast<int>(channels), config.rate);
  std::vector<std::vector<std::int32_t>> out(channels, std::vector<std::int32_t>(n));
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      out[c][i] = codec::phys_to_dig(physical_value(spec, c, config.rate, t0 + i), calibration).value;
    }
  }
  return out;
}

nlohmann::json to_json(const SignalSpec& spec) {
  nlohmann::json channels = nlohmann::json::array();
  for (const auto& comps : spec.channels) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : comps) {
      nlohmann::json j{{"waveform", waveform_name(c.waveform)}, {"amplitude", c.amplitude}};
      if (c.waveform == Waveform::kSine) {
        j["frequency"] = c.frequency;
        j["phase"] = c.phase;
      }
      arr.push_back(std::move(j));
    }
    channels.push_back(std::move(arr));
  }
  return {{"seed", spec.seed}, {"channels", channels}};
}

SignalSpec signal_spec_from_json(const nlohmann::json& j) {
  auto parse_components = [](const nlohmann::json& arr) {
    std::vector<Component> out;
    for (const auto& c : arr) {
      Component comp;
      comp.waveform = parse_waveform(c.at("waveform").get<std::string>());
      comp.amplitude = c.value("amplitude", 0.0);
      comp.frequency = c.value("frequency", 0.0);
      comp.phase = c.value("phase", 0.0);
      out.push_back(comp);
    }
    return out;
  };
  SignalSpec s;
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("components")) {
    s.channels.push_back(parse_components(j.at("components")));
  } else {
    for (const auto& ch : j.at("channels")) s.channels.push_back(parse_components(ch));
  }
  return s;
}

}  // namespace eegcare::sim
