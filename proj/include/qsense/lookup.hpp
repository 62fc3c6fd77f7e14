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
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qsense/fitting.hpp"
#include "qsense/ramsey.hpp"
#include "qsense/transmon.hpp"

namespace qsense::lookup {

inline constexpr const char* kGeneratorVersion = "qsense-lookup-1";

/// Detection window of a Ramsey protocol: the Ramsey
/// frequency must stay below n_r / (10 delta_t_max) (five samples per
/// period at half the sampling rate) and above 1 / delta_t_max (one period).
struct SensorLimits {
  double delta1_max = 0.0;  // rad/ns
  double delta2_min = 0.0;  // rad/ns
  int n_r = 0;
  double delta_t_max = 0.0;  // ns

  /// True when a shift pair measured with the given gate offsets produces
  /// Ramsey frequencies inside the window.
  bool contains(double delta1, double delta2, double offset1 = 0.0, double offset2 = 0.0) const;
};

SensorLimits limits(int n_r, double delta_t_max);

/// Everything that determines the simulated shift for a given field.
struct PipelineConfig {
  transmon::TransmonParams transmon;
  dynamics::RamseyConfig ramsey;

  SensorLimits sensor_limits() const { return limits(ramsey.n_steps, ramsey.delta_t_max); }
};

/// Grid axes, angular units (rad/ns).
struct GridSpec {
  double amp_min = 0.0;
  double amp_max = 0.0;
  int amp_count = 1;
  double freq_min = 0.0;
  double freq_max = 0.0;
  int freq_count = 1;

  std::vector<double> amp_axis() const;
  std::vector<double> freq_axis() const;
  void validate() const;
};

enum class EntryStatus : int { Pending = 0, Done = 1, Hole = 2 };

/// Precomputed shift surfaces indexed [amplitude][frequency]. Holes are NaN.
struct LookupGrid {
  std::vector<double> amp_axis;
  std::vector<double> freq_axis;
  Eigen::MatrixXd delta1;
  Eigen::MatrixXd delta2;
  Eigen::MatrixXi status;
  PipelineConfig config;
  std::string fit_model = fitting::kModelId;
  std::string generator_version = kGeneratorVersion;

  int rows() const { return static_cast<int>(amp_axis.size()); }
  int cols() const { return static_cast<int>(freq_axis.size()); }
  bool usable(int a, int f) const;
  /// Entries whose shifts fall inside the sensor window.
  Eigen::MatrixXi in_range_mask() const;
  double hole_fraction() const;
  bool complete() const;
  /// Empty grid with all entries pending.
  static LookupGrid empty(const GridSpec& spec, const PipelineConfig& config);
};

/// Shifts measured by the two Ramsey pipelines, plus their intermediates.
struct MeasuredShifts {
  fitting::ShiftMeasurement first;
  fitting::ShiftMeasurement second;
  fitting::DampedSineFit fit1;
  fitting::DampedSineFit fit2;
  RamseyTrace trace1;
  RamseyTrace trace2;
};

struct MeasureOptions {
  long n_avg = 0;  // 0: noiseless traces
  std::uint64_t seed = 0;
  bool allow_sub_period = false;
};

/// Runs the first-transition Ramsey pipeline, fits it, uses the measured
/// shift to place the shelving pulses of the second-transition pipeline and
/// fits that one too.
MeasuredShifts measure_shifts(const dynamics::QuditOperators& ops,
                              const std::optional<dynamics::DriveTone>& field,
                              const dynamics::RamseyConfig& ramsey, const MeasureOptions& options);

/// Fits externally supplied traces for both transitions.
MeasuredShifts shifts_from_traces(const RamseyTrace& trace1, const RamseyTrace& trace2,
                                  const dynamics::QuditOperators& ops,
                                  const dynamics::RamseyConfig& ramsey);

struct GenerateOptions {
  bool parallel = true;  // false runs the serial reference loop
  int jobs = 0;          // 0: OpenMP default
  double max_hole_fraction = 0.05;
  /// Called after each completed amplitude row with the partial grid.
  std::function<void(const LookupGrid&, int)> on_row;
};

/// Fills every pending entry of `grid` by running both noiseless pipelines.
/// Failed fits become holes; more than max_hole_fraction holes throws
/// NumericError. Results do not depend on `parallel` or `jobs`.
void fill(LookupGrid& grid, const GenerateOptions& options = {});

/// Builds a grid for `spec` and fills it. Frequencies must lie above
/// omega_1 and amplitudes within [0, 0.15 GHz * 2 pi] unless `allow_strong`.
LookupGrid generate(const GridSpec& spec, const PipelineConfig& config,
                    const GenerateOptions& options = {}, bool allow_strong = false);

struct InvertOptions {
  bool weighted = false;     // divide shift differences by their sigma
  bool interpolate = true;   // bilinear refinement inside the best cell
  bool check_limits = true;  // reject pairs outside the sensor window
  bool clamp = false;        // return the closest hull point instead of throwing
};

struct SenseResult {
  double amp = 0.0;   // rad/ns
  double freq = 0.0;  // rad/ns
  double amp_err = 0.0;
  double freq_err = 0.0;
  double distance = 0.0;  // remaining shift mismatch, rad/ns
  bool ambiguous = false;
  bool clamped = false;
  double power_dbm = 0.0;
  int amp_index = 0;   // lower-left corner of the winning cell (or node)
  int freq_index = 0;
};

/// Finds the field whose tabulated shifts are closest to the measured
/// pair. Throws OutOfRangeError for pairs outside the sensor window or
/// the table hull (unless clamped) and NumericError when every entry is a hole.
SenseResult invert(const fitting::ShiftMeasurement& delta1, const fitting::ShiftMeasurement& delta2,
                   const LookupGrid& grid, const InvertOptions& options = {});

struct Uncertainty {
  double amp_err = 0.0;
  double freq_err = 0.0;
  bool clamped = false;
};

/// Half the spread of the fields recovered at (delta1 +- sigma1, delta2 +- sigma2).
Uncertainty propagate_uncertainty(const fitting::ShiftMeasurement& delta1,
                                  const fitting::ShiftMeasurement& delta2, const LookupGrid& grid,
                                  const InvertOptions& options = {});

/// Mean absolute change of the recovered frequency when every first
/// shift is displaced by +offset and by -offset.
double tls_offset_study(double offset,
                        const std::vector<std::pair<fitting::ShiftMeasurement,
                                                    fitting::ShiftMeasurement>>& dataset,
                        const LookupGrid& grid, const InvertOptions& options = {});

/// Power hbar * A * w carried by the field, in dBm (A, w in rad/ns).
double power_dbm(double amp, double freq);

}  // namespace qsense::lookup
