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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsense/config.hpp"
#include "qsense/lookup.hpp"

namespace qsense::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitOutOfRange = 4;

/// Options shared by all subcommands.
struct Context {
  std::optional<std::uint64_t> seed;  // overrides the config seed
  std::string out;                    // output path; empty picks a default
  int jobs = 0;
  std::ostream* report = nullptr;  // human-readable results (stdout)
  std::ostream* log = nullptr;     // progress messages (stderr)

  std::uint64_t effective_seed(const config::RunConfig& c) const { return seed ? *seed : c.seed; }
  /// `out` if given, otherwise `name` inside $QSENSE_OUT_DIR (or the cwd).
  std::string output_path(const std::string& name) const;
};

/// Full sensing run for one field or one pair of measured traces.
struct SenseReport {
  lookup::MeasuredShifts shifts;
  lookup::SenseResult result;
  lookup::SensorLimits limits;
  std::optional<double> applied_amp_ghz;
  std::optional<double> applied_freq_ghz;
  nlohmann::json to_json() const;
};

/// fit -> extract_shift -> invert -> propagate_uncertainty -> power for a
/// synthetic field (noisy traces at config.n_avg) or the configured traces.
SenseReport run_sense(const config::RunConfig& config, const lookup::LookupGrid& grid,
                      std::uint64_t seed);

struct SweepPoint {
  double freq_apl_ghz = 0.0;
  double amp_apl_ghz = 0.0;  // on-chip truth after the transfer function
  double gain = 1.0;
  bool ok = false;
  std::string error;
  lookup::SenseResult result;
  double delta1_mhz = 0.0;
  double delta2_mhz = 0.0;
  double sigma1_khz = 0.0;
  double sigma2_khz = 0.0;

  double discrepancy_mhz() const;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  double wall_time_per_point_s = 0.0;  // emulated experiment time, both transitions
  std::string to_csv() const;
  nlohmann::json summary() const;
};

/// Runs the sensing pipeline at every sweep frequency; per-point failures
/// are recorded and the sweep continues. Point k uses seed mix(seed, k).
SweepResult run_sweep(const config::RunConfig& config, const lookup::LookupGrid& grid,
                      std::uint64_t seed, int jobs);

/// Emulated acquisition time N_R * N_avg * T_rep for both transitions, seconds.
double wall_time_estimate(const config::RunConfig& config);

int cmd_calibrate(const config::RunConfig& config, const Context& ctx);
int cmd_gen_table(const config::RunConfig& config, const Context& ctx);
int cmd_sense(const config::RunConfig& config, const Context& ctx);
int cmd_sweep(const config::RunConfig& config, const Context& ctx);
int cmd_limits(const config::RunConfig& config, const Context& ctx);
int cmd_phase_scan(const config::RunConfig& config, const Context& ctx);
int cmd_synth_trace(const config::RunConfig& config, const Context& ctx);

/// Maps the library exception hierarchy onto the exit-code contract.
int exit_code_for(const std::exception& e);

}  // namespace qsense::cli
