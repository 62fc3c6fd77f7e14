// Copyright 2026 The qsense Authors
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

#include <numbers>

// Internally every angular frequency is in rad/ns and every time in ns.
// Files and the CLI speak ordinary frequencies (omega / 2 pi) in GHz or MHz.
namespace qsense::units {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double ghz_to_rad_ns(double f_ghz) { return kTwoPi * f_ghz; }
constexpr double mhz_to_rad_ns(double f_mhz) { return kTwoPi * f_mhz * 1e-3; }
constexpr double khz_to_rad_ns(double f_khz) { return kTwoPi * f_khz * 1e-6; }

constexpr double rad_ns_to_ghz(double w) { return w / kTwoPi; }
constexpr double rad_ns_to_mhz(double w) { return w / kTwoPi * 1e3; }
constexpr double rad_ns_to_khz(double w) { return w / kTwoPi * 1e6; }

// CODATA 2018 exact values.
inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kHbar = kPlanck / kTwoPi;        // J s
inline constexpr double kBoltzmann = 1.380649e-23;       // J / K

}  // namespace qsense::units
