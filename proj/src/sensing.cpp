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

#include <cmath>

#include "qsense/errors.hpp"
#include "qsense/lookup.hpp"
#include "qsense/units.hpp"

namespace qsense::lookup {

bool SensorLimits::contains(double delta1, double delta2, double offset1, double offset2) const {
  return delta1 + offset1 <= delta1_max && delta2 + offset2 >= delta2_min;
}

SensorLimits limits(int n_r, double delta_t_max) {
  if (n_r < 2) throw ValidationError("limits: n_r must be at least 2");
  if (!(delta_t_max > 0.0)) throw ValidationError("limits: delta_t_max must be positive");
  SensorLimits s;
  s.n_r = n_r;
  s.delta_t_max = delta_t_max;
  s.delta1_max = units::kTwoPi * static_cast<double>(n_r) / (10.0 * delta_t_max);
  s.delta2_min = units::kTwoPi / delta_t_max;
  return s;
}

double power_dbm(double amp, double freq) {
  if (!(amp > 0.0)) throw ValidationError("power_dbm: amplitude must be positive");
  if (!(freq > 0.0)) throw ValidationError("power_dbm: frequency must be positive");
  const double watts = units::kHbar * (amp * 1e9) * (freq * 1e9);
  return 10.0 * std::log10(watts / 1e-3);
}

MeasuredShifts measure_shifts(const dynamics::QuditOperators& ops,
                              const std::optional<dynamics::DriveTone>& field,
                              const dynamics::RamseyConfig& ramsey, const MeasureOptions& options) {
  fitting::FitOptions fit_opts;
  fit_opts.allow_sub_period = options.allow_sub_period;

  MeasuredShifts out;
  out.trace1 = dynamics::ramsey_trace(ops, 1, field, ramsey);
  if (options.n_avg > 0) {
    out.trace1 = dynamics::add_measurement_noise(out.trace1, options.n_avg,
                                                 dynamics::mix_seed(options.seed, 1));
  }
  out.fit1 = fitting::fit_damped_sine(out.trace1, fit_opts);
  out.first = fitting::extract_shift(out.fit1, ramsey.gate_freq(ops, 1), ops.omega(1), 1);

  out.trace2 = dynamics::ramsey_trace(ops, 2, field, ramsey, out.first.delta);
  if (options.n_avg > 0) {
    out.trace2 = dynamics::add_measurement_noise(out.trace2, options.n_avg,
                                                 dynamics::mix_seed(options.seed, 2));
  }
  out.fit2 = fitting::fit_damped_sine(out.trace2, fit_opts);
  out.second = fitting::extract_shift(out.fit2, ramsey.gate_freq(ops, 2), ops.omega(2), 2);
  return out;
}

MeasuredShifts shifts_from_traces(const RamseyTrace& trace1, const RamseyTrace& trace2,
                                  const dynamics::QuditOperators& ops,
                                  const dynamics::RamseyConfig& ramsey) {
  MeasuredShifts out;
  out.trace1 = trace1;
  out.trace2 = trace2;
  out.fit1 = fitting::fit_damped_sine(trace1);
  out.first = fitting::extract_shift(out.fit1, ramsey.gate_freq(ops, 1), ops.omega(1), 1);
  out.fit2 = fitting::fit_damped_sine(trace2);
  out.second = fitting::extract_shift(out.fit2, ramsey.gate_freq(ops, 2), ops.omega(2), 2);
  return out;
}

}  // namespace qsense::lookup
