// Copyright 2026 The Dicke Lab Authors
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

#include <cmath>
#include <complex>
#include <numbers>

namespace dicke {

using complex_t = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Interface values are quoted as f = omega / 2pi in kHz; internally everything
// is angular frequency in rad/s and time in seconds.
constexpr double khz_to_angular(double khz) { return kTwoPi * 1e3 * khz; }
constexpr double angular_to_khz(double omega) { return omega / (kTwoPi * 1e3); }
constexpr double ms_to_s(double ms) { return 1e-3 * ms; }
constexpr double s_to_ms(double s) { return 1e3 * s; }

/// Wraps an angle into [0, 2pi).
inline double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

}  // namespace dicke
