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

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsense/lookup.hpp"

namespace qsense::config {

/// Frequency response between the source and the chip, applied to the
/// source amplitude: on-chip A = gain(f) * source A.
struct TransferFunction {
  enum class Kind { Identity, Lorentzian, Curve };
  Kind kind = Kind::Identity;
  double center_ghz = 0.0;  // Lorentzian
  double width_mhz = 0.0;   // full width at half maximum
  double peak = 1.0;
  double floor = 0.0;
  std::vector<std::pair<double, double>> curve;  // (freq_ghz, gain), increasing freq

  double gain(double freq_ghz) const;
};

/// Microwave field under test, given as an amplitude or as a source power.
/// For power input A = amp_per_sqrt_mw_ghz * sqrt(10^(P/10 dBm)).
struct FieldSpec {
  std::optional<double> amp_ghz;
  std::optional<double> power_dbm;
  double amp_per_sqrt_mw_ghz = 0.0;
  double freq_ghz = 0.0;

  double source_amp_ghz() const;
};

struct SweepSpec {
  double freq_start_ghz = 0.0;
  double freq_stop_ghz = 0.0;
  int points = 20;
  TransferFunction transfer;
};

struct SenseSpec {
  std::string table;
  std::string trace1;
  std::string trace2;
  bool weighted = false;
  bool interpolate = true;
};

struct PhaseScanSpec {
  double omega_a_mhz = 30.0;
  double detuning_max_mhz = 25.0;
  int points = 51;
  double phase_slope_rad_per_mhz = 0.0;  // phi(detuning) = slope * detuning
  double phase_offset_rad = 0.0;
};

struct SynthSpec {
  int transition = 1;
  std::optional<double> shift_hint_mhz;
  bool noisy = true;
};

/// Parsed and validated run configuration. Frequencies are ordinary (GHz,
/// MHz) as in the file; conversion to angular units happens on use.
struct RunConfig {
  std::optional<transmon::TransmonParams> transmon;
  std::optional<std::pair<double, double>> targets_ghz;  // (omega1, omega2)
  double n_g = 0.0;
  int charge_cutoff = 30;
  int d_keep = 7;

  dynamics::RamseyConfig ramsey;
  long n_avg = 3000;
  double t_rep_us = 240.0;

  lookup::GridSpec grid;
  std::optional<FieldSpec> field;
  std::optional<SweepSpec> sweep;
  SenseSpec sense;
  PhaseScanSpec phase_scan;
  SynthSpec synth;
  std::uint64_t seed = 0;

  /// Transmon parameters, fitting them to the targets when only those are given.
  transmon::TransmonParams resolve_transmon() const;
  lookup::PipelineConfig pipeline() const;
};

/// Validates `j` against the configuration schema. Unknown keys, wrong
/// types and out-of-range values raise ValidationError naming the field
/// path, e.g. "ramsey.n_steps".
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Default grid: 31 amplitudes in [0, 0.15] GHz by 61 frequencies in [4.75, 5.6] GHz.
lookup::GridSpec default_grid();

}  // namespace qsense::config
