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

#include "eegcare/codec/calibration.hpp"

#include <cmath>

namespace eegcare::codec {

namespace {

void require_usable(const Calibration& cal) {
  if (cal.degenerate()) {
    throw CalibrationError("degenerate calibration");
  }
}

}  // namespace

double Calibration::step() const {
  require_usable(*this);
  return (physical_max - physical_min) /
         (static_cast<double>(digital_max) - static_cast<double>(digital_min));
}

PhysicalSample dig_to_phys(std::int64_t sample, const Calibration& cal) {
  require_usable(cal);
  PhysicalSample out;
  if (sample < cal.digital_min) {
    sample = cal.digital_min;
    out.clamped = true;
  } else if (sample > cal.digital_max) {
    sample = cal.digital_max;
    out.clamped = true;
  }
  const double span =
      static_cast<double>(cal.digital_max) - static_cast<double>(cal.digital_min);
  const double t = (static_cast<double>(sample) - cal.digital_min) / span;
  // Two-sided interpolation: t == 0 and t == 1 reproduce the endpoints
  // bit-exactly, which the one-sided form does not.
  out.value = cal.physical_min * (1.0 - t) + cal.physical_max * t;
  return out;
}

DigitalSample phys_to_dig(double value, const Calibration& cal) {
  require_usable(cal);
  DigitalSample out;
  const double span =
      static_cast<double>(cal.digital_max) - static_cast<double>(cal.digital_min);
  const double d =
      cal.digital_min + (value - cal.physical_min) * span / (cal.physical_max - cal.physical_min);
  const double r = std::round(d);  // ties away from zero
  if (!(r >= cal.digital_min)) {   // also catches NaN
    out.value = cal.digital_min;
    out.clamped = true;
  } else if (r > cal.digital_max) {
    out.value = cal.digital_max;
    out.clamped = true;
  } else {
    out.value = static_cast<std::int32_t>(r);
  }
  return out;
}

}  // namespace eegcare::codec
