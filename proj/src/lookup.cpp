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

#include "qsense/lookup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <omp.h>

#include "qsense/errors.hpp"
#include "qsense/units.hpp"

namespace qsense::lookup {

namespace {

constexpr double kMaxTableAmp = units::kTwoPi * 0.15;

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    out[static_cast<size_t>(k)] =
        count == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(count - 1);
  }
  return out;
}

// Shift-space point, scaled by sigma when the weighted metric is active.
struct Metric {
  double scale1 = 1.0;
  double scale2 = 1.0;
  Eigen::Vector2d target;

  Eigen::Vector2d map(double d1, double d2) const { return {d1 / scale1, d2 / scale2}; }
};

struct CellFit {
  int a = 0;
  int f = 0;
  double u = 0.0;  // fractional position along amplitude
  double v = 0.0;  // fractional position along frequency
  double residual = std::numeric_limits<double>::infinity();
};

// Minimizes |P(u, v) - target| for the bilinear patch through four corner
// points with a clamped Gauss-Newton iteration on [0, 1]^2.
CellFit solve_patch(const Eigen::Vector2d& p00, const Eigen::Vector2d& p10,
                    const Eigen::Vector2d& p01, const Eigen::Vector2d& p11,
                    const Eigen::Vector2d& target) {
  auto eval = [&](double u, double v) {
    return ((1 - u) * (1 - v)) * p00 + (u * (1 - v)) * p10 + ((1 - u) * v) * p01 + (u * v) * p11;
  };
  double u = 0.5;
  double v = 0.5;
  for (int it = 0; it < 40; ++it) {
    const Eigen::Vector2d r = eval(u, v) - target;
    Eigen::Matrix2d jac;
    jac.col(0) = (1 - v) * (p10 - p00) + v * (p11 - p01);
    jac.col(1) = (1 - u) * (p01 - p00) + u * (p11 - p10);
    const Eigen::Vector2d step = jac.completeOrthogonalDecomposition().solve(-r);
    if (!step.allFinite()) break;
    const double nu = std::clamp(u + step(0), 0.0, 1.0);
    const double nv = std::clamp(v + step(1), 0.0, 1.0);
    const double moved = std::abs(nu - u) + std::abs(nv - v);
    u = nu;
    v = nv;
    if (moved < 1e-14) break;
  }
  CellFit fit;
  fit.u = u;
  fit.v = v;
  fit.residual = (eval(u, v) - target).norm();
  return fit;
}

// 1-D analogue on a segment between two points.
CellFit solve_segment(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                      const Eigen::Vector2d& target) {
  const Eigen::Vector2d dir = p1 - p0;
  const double len2 = dir.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((target - p0).dot(dir) / len2, 0.0, 1.0) : 0.0;
  CellFit fit;
  fit.u = s;
  fit.residual = (p0 + s * dir - target).norm();
  return fit;
}

Metric make_metric(const fitting::ShiftMeasurement& d1, const fitting::ShiftMeasurement& d2,
                   bool weighted) {
  Metric m;
  if (weighted) {
    if (!(d1.sigma > 0.0) || !(d2.sigma > 0.0)) {
      throw ValidationError("invert: the weighted metric needs positive sigmas");
    }
    m.scale1 = d1.sigma;
    m.scale2 = d2.sigma;
  }
  m.target = m.map(d1.delta, d2.delta);
  return m;
}

SenseResult invert_core(double t1, double t2, double sigma1, double sigma2, const LookupGrid& grid,
                        const InvertOptions& options) {
  fitting::ShiftMeasurement m1{1, t1, sigma1, 0.0, 0.0};
  fitting::ShiftMeasurement m2{2, t2, sigma2, 0.0, 0.0};
  const Metric metric = make_metric(m1, m2, options.weighted);
  const int rows = grid.rows();
  const int cols = grid.cols();
  auto point = [&](int a, int f) { return metric.map(grid.delta1(a, f), grid.delta2(a, f)); };

  // Nearest usable node.
  int best_a = -1;
  int best_f = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < rows; ++a) {
    for (int f = 0; f < cols; ++f) {
      if (!grid.usable(a, f)) continue;
      const double d = (point(a, f) - metric.target).norm();
      if (d < best_d) {
        best_d = d;
        best_a = a;
        best_f = f;
      }
    }
  }
  if (best_a < 0) throw NumericError("invert: the table contains no usable entries");

  SenseResult res;
  res.amp = grid.amp_axis[static_cast<size_t>(best_a)];
  res.freq = grid.freq_axis[static_cast<size_t>(best_f)];
  res.amp_index = best_a;
  res.freq_index = best_f;
  res.distance = best_d;

  const double spread = options.weighted ? 1.0 : std::max(sigma1, sigma2);
  const double scale_ref = std::max({std::abs(metric.target(0)), std::abs(metric.target(1)), 1e-300});
  const bool exact_node = best_d <= 1e-12 * scale_ref;

  std::vector<CellFit> cells;
  if (options.interpolate && !exact_node && (rows > 1 || cols > 1)) {
    if (rows > 1 && cols > 1) {
      for (int a = 0; a + 1 < rows; ++a) {
        for (int f = 0; f + 1 < cols; ++f) {
          if (!grid.usable(a, f) || !grid.usable(a + 1, f) || !grid.usable(a, f + 1) ||
              !grid.usable(a + 1, f + 1)) {
            continue;
          }
          CellFit c = solve_patch(point(a, f), point(a + 1, f), point(a, f + 1),
                                  point(a + 1, f + 1), metric.target);
          c.a = a;
          c.f = f;
          cells.push_back(c);
        }
      }
    } else {
      const bool along_amp = rows > 1;
      const int n = along_amp ? rows : cols;
      for (int k = 0; k + 1 < n; ++k) {
        const int a0 = along_amp ? k : 0;
        const int f0 = along_amp ? 0 : k;
        const int a1 = along_amp ? k + 1 : 0;
        const int f1 = along_amp ? 0 : k + 1;
        if (!grid.usable(a0, f0) || !grid.usable(a1, f1)) continue;
        CellFit c = solve_segment(point(a0, f0), point(a1, f1), metric.target);
        if (!along_amp) std::swap(c.u, c.v);
        c.a = a0;
        c.f = f0;
        cells.push_back(c);
      }
    }
  }

  if (!cells.empty()) {
    const CellFit* best = &cells.front();
    for (const CellFit& c : cells) {
      if (c.residual < best->residual) best = &c;
    }
    if (best->residual <= best_d) {
      const auto a = static_cast<size_t>(best->a);
      const auto f = static_cast<size_t>(best->f);
      const double amp_hi = rows > 1 ? grid.amp_axis[a + 1] : grid.amp_axis[a];
      const double freq_hi = cols > 1 ? grid.freq_axis[f + 1] : grid.freq_axis[f];
      res.amp = grid.amp_axis[a] + best->u * (amp_hi - grid.amp_axis[a]);
      res.freq = grid.freq_axis[f] + best->v * (freq_hi - grid.freq_axis[f]);
      res.amp_index = best->a;
      res.freq_index = best->f;
      res.distance = best->residual;
    }
    // A second, separate cell that also reproduces the pair within the
    // measurement spread means the inversion is not unique.
    for (const CellFit& c : cells) {
      if (c.residual <= res.distance + spread &&
          (std::abs(c.a - res.amp_index) > 1 || std::abs(c.f - res.freq_index) > 1)) {
        res.ambiguous = true;
        break;
      }
    }
  }

  const double hull_tol = options.weighted
                              ? 2.0
                              : std::max(2.0 * std::max(sigma1, sigma2), units::khz_to_rad_ns(1.0));
  const bool single_node = rows == 1 && cols == 1;
  if (!single_node && res.distance > hull_tol) {
    if (!options.clamp) {
      throw OutOfRangeError("invert: shift pair (" + std::to_string(units::rad_ns_to_mhz(t1)) +
                            ", " + std::to_string(units::rad_ns_to_mhz(t2)) +
                            ") MHz lies outside the table hull");
    }
    res.clamped = true;
  }
  if (res.amp < 0.0) res.amp = 0.0;
  res.power_dbm = res.amp > 0.0 ? power_dbm(res.amp, res.freq)
                                : -std::numeric_limits<double>::infinity();
  return res;
}

}  // namespace

std::vector<double> GridSpec::amp_axis() const { return linspace(amp_min, amp_max, amp_count); }
std::vector<double> GridSpec::freq_axis() const { return linspace(freq_min, freq_max, freq_count); }

void GridSpec::validate() const {
  if (amp_count < 1 || freq_count < 1) throw ValidationError("grid: counts must be >= 1");
  if (!(amp_min >= 0.0) || !std::isfinite(amp_max)) {
    throw ValidationError("grid: amplitudes must be finite and >= 0");
  }
  if (!(freq_min > 0.0) || !std::isfinite(freq_max)) {
    throw ValidationError("grid: frequencies must be finite and positive");
  }
  if ((amp_count > 1 && !(amp_max > amp_min)) || (freq_count > 1 && !(freq_max > freq_min))) {
    throw ValidationError("grid: axes must be strictly increasing");
  }
}

bool LookupGrid::usable(int a, int f) const {
  return status(a, f) == static_cast<int>(EntryStatus::Done) && std::isfinite(delta1(a, f)) &&
         std::isfinite(delta2(a, f));
}

Eigen::MatrixXi LookupGrid::in_range_mask() const {
  const SensorLimits lim = config.sensor_limits();
  Eigen::MatrixXi mask = Eigen::MatrixXi::Zero(rows(), cols());
  for (int a = 0; a < rows(); ++a) {
    for (int f = 0; f < cols(); ++f) {
      if (usable(a, f) && lim.contains(delta1(a, f), delta2(a, f), config.ramsey.gate_offset1,
                                       config.ramsey.gate_offset2)) {
        mask(a, f) = 1;
      }
    }
  }
  return mask;
}

double LookupGrid::hole_fraction() const {
  const auto holes = (status.array() == static_cast<int>(EntryStatus::Hole)).count();
  return static_cast<double>(holes) / static_cast<double>(status.size());
}

bool LookupGrid::complete() const {
  return (status.array() != static_cast<int>(EntryStatus::Pending)).all();
}

LookupGrid LookupGrid::empty(const GridSpec& spec, const PipelineConfig& config) {
  spec.validate();
  LookupGrid g;
  g.amp_axis = spec.amp_axis();
  g.freq_axis = spec.freq_axis();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  g.delta1 = Eigen::MatrixXd::Constant(spec.amp_count, spec.freq_count, nan);
  g.delta2 = Eigen::MatrixXd::Constant(spec.amp_count, spec.freq_count, nan);
  g.status = Eigen::MatrixXi::Zero(spec.amp_count, spec.freq_count);
  g.config = config;
  return g;
}

void fill(LookupGrid& grid, const GenerateOptions& options) {
  const transmon::Diagonalization diag = transmon::diagonalize(grid.config.transmon);
  const dynamics::QuditOperators ops = dynamics::QuditOperators::from(diag);
  const dynamics::RamseyConfig ramsey = grid.config.ramsey;
  ramsey.validate();
  MeasureOptions measure;
  measure.allow_sub_period = true;

  const int rows = grid.rows();
  const int cols = grid.cols();
  const auto total = static_cast<double>(rows) * cols;
  const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();

  for (int a = 0; a < rows; ++a) {
    std::vector<int> pending;
    for (int f = 0; f < cols; ++f) {
      if (grid.status(a, f) == static_cast<int>(EntryStatus::Pending)) pending.push_back(f);
    }
    if (pending.empty()) continue;
    std::vector<double> d1(pending.size());
    std::vector<double> d2(pending.size());
    std::vector<int> state(pending.size());
    const double amp = grid.amp_axis[static_cast<size_t>(a)];
    const auto n = static_cast<long>(pending.size());

    auto compute = [&](long k) {
      const auto idx = static_cast<size_t>(k);
      const double freq = grid.freq_axis[static_cast<size_t>(pending[idx])];
      try {
        const MeasuredShifts m = measure_shifts(ops, dynamics::DriveTone{amp, freq, 0.0}, ramsey, measure);
        d1[idx] = m.first.delta;
        d2[idx] = m.second.delta;
        state[idx] = static_cast<int>(EntryStatus::Done);
      } catch (const Error&) {
        d1[idx] = std::numeric_limits<double>::quiet_NaN();
        d2[idx] = std::numeric_limits<double>::quiet_NaN();
        state[idx] = static_cast<int>(EntryStatus::Hole);
      }
    };

    if (options.parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
      for (long k = 0; k < n; ++k) compute(k);
    } else {
      for (long k = 0; k < n; ++k) compute(k);
    }

    for (size_t k = 0; k < pending.size(); ++k) {
      grid.delta1(a, pending[k]) = d1[k];
      grid.delta2(a, pending[k]) = d2[k];
      grid.status(a, pending[k]) = state[k];
    }
    if (options.on_row) options.on_row(grid, a);
    const auto holes = (grid.status.array() == static_cast<int>(EntryStatus::Hole)).count();
    if (static_cast<double>(holes) > options.max_hole_fraction * total) {
      throw NumericError("generate: " + std::to_string(holes) +
                         " failed grid points exceed the allowed hole fraction");
    }
  }
}

LookupGrid generate(const GridSpec& spec, const PipelineConfig& config,
                    const GenerateOptions& options, bool allow_strong) {
  spec.validate();
  config.transmon.validate();
  config.ramsey.validate();
  const transmon::Diagonalization diag = transmon::diagonalize(config.transmon);
  const double omega1 = units::ghz_to_rad_ns(diag.spectrum.transitions[0]);
  if (!(spec.freq_min > omega1)) {
    throw ValidationError("generate: the frequency axis must lie above the first transition (" +
                          std::to_string(diag.spectrum.transitions[0]) + " GHz)");
  }
  if (!allow_strong && spec.amp_max > kMaxTableAmp * (1.0 + 1e-12)) {
    throw ValidationError("generate: amplitudes above 0.15 GHz leave the validated drive range");
  }
  LookupGrid grid = LookupGrid::empty(spec, config);
  fill(grid, options);
  return grid;
}

SenseResult invert(const fitting::ShiftMeasurement& delta1, const fitting::ShiftMeasurement& delta2,
                   const LookupGrid& grid, const InvertOptions& options) {
  if (options.check_limits) {
    const SensorLimits lim = grid.config.sensor_limits();
    if (!lim.contains(delta1.delta, delta2.delta, grid.config.ramsey.gate_offset1,
                      grid.config.ramsey.gate_offset2)) {
      throw OutOfRangeError(
          "invert: shifts (" + std::to_string(units::rad_ns_to_mhz(delta1.delta)) + ", " +
          std::to_string(units::rad_ns_to_mhz(delta2.delta)) +
          ") MHz outside the sensor window: Ramsey frequencies must satisfy w_R1/2pi <= " +
          std::to_string(units::rad_ns_to_mhz(lim.delta1_max)) + " MHz and w_R2/2pi >= " +
          std::to_string(units::rad_ns_to_mhz(lim.delta2_min)) + " MHz (N_R = " +
          std::to_string(lim.n_r) + ", delta_t_max = " + std::to_string(lim.delta_t_max) + " ns)");
    }
  }
  return invert_core(delta1.delta, delta2.delta, delta1.sigma, delta2.sigma, grid, options);
}

Uncertainty propagate_uncertainty(const fitting::ShiftMeasurement& delta1,
                                  const fitting::ShiftMeasurement& delta2, const LookupGrid& grid,
                                  const InvertOptions& options) {
  if (delta1.sigma == 0.0 && delta2.sigma == 0.0) return {};
  InvertOptions corner_opts = options;
  corner_opts.check_limits = false;
  corner_opts.clamp = true;
  Uncertainty u;
  double amp_lo = std::numeric_limits<double>::infinity();
  double amp_hi = -amp_lo;
  double freq_lo = amp_lo;
  double freq_hi = -amp_lo;
  for (int s1 : {-1, 1}) {
    for (int s2 : {-1, 1}) {
      const SenseResult r =
          invert_core(delta1.delta + s1 * delta1.sigma, delta2.delta + s2 * delta2.sigma,
                      delta1.sigma, delta2.sigma, grid, corner_opts);
      u.clamped = u.clamped || r.clamped;
      amp_lo = std::min(amp_lo, r.amp);
      amp_hi = std::max(amp_hi, r.amp);
      freq_lo = std::min(freq_lo, r.freq);
      freq_hi = std::max(freq_hi, r.freq);
    }
  }
  u.amp_err = 0.5 * (amp_hi - amp_lo);
  u.freq_err = 0.5 * (freq_hi - freq_lo);
  return u;
}

double tls_offset_study(double offset,
                        const std::vector<std::pair<fitting::ShiftMeasurement,
                                                    fitting::ShiftMeasurement>>& dataset,
                        const LookupGrid& grid, const InvertOptions& options) {
  if (dataset.empty()) throw ValidationError("tls_offset_study: dataset is empty");
  InvertOptions opts = options;
  opts.check_limits = false;
  opts.clamp = true;
  double sum = 0.0;
  for (const auto& [first, second] : dataset) {
    const SenseResult center = invert_core(first.delta, second.delta, first.sigma, second.sigma, grid, opts);
    for (int sign : {-1, 1}) {
      const SenseResult moved = invert_core(first.delta + sign * offset, second.delta, first.sigma,
                                            second.sigma, grid, opts);
      sum += std::abs(moved.freq - center.freq);
    }
  }
  return sum / (2.0 * static_cast<double>(dataset.size()));
}

}  // namespace qsense::lookup
