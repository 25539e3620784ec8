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

#include "eegcare/codec/model.hpp"

namespace eegcare::codec {

// Linear map between stored integers and physical units.
struct Calibration {
  double physical_min = -1.0;
  double physical_max = 1.0;
  std::int32_t digital_min = -32768;
  std::int32_t digital_max = 32767;

  static Calibration of(const SignalHeader& s) {
    return {s.physical_min, s.physical_max, s.digital_min, s.digital_max};
  }
  bool degenerate() const {
    return digital_min >= digital_max || physical_min == physical_max;
  }
  // Physical units per digital step.
  double step() const;
};

class CalibrationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct PhysicalSample {
  double value = 0.0;
  bool clamped = false;
};

struct DigitalSample {
  std::int32_t value = 0;
  bool clamped = false;
};

// (sample - dmin) * (pmax - pmin) / (dmax - dmin) + pmin, evaluated so that
// dmin and dmax map to pmin and pmax exactly. Out-of-range samples are
// clamped to [dmin, dmax] and flagged. Throws CalibrationError when the
// calibration is degenerate.
PhysicalSample dig_to_phys(std::int64_t sample, const Calibration& cal);

// Inverse of dig_to_phys, rounding half away from zero, clamped and flagged
// to [dmin, dmax].
DigitalSample phys_to_dig(double value, const Calibration& cal);

}  // namespace eegcare::codec
