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

#include "qsense/ramsey.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qsense/errors.hpp"

namespace qsense::dynamics {

namespace {

// Dressed state of level `level` at absolute time t, expressed in the
// interaction frame. The dressed states are stationary in the field frame.
Eigen::VectorXcd dressed_at(const QuditOperators& ops, const Eigen::MatrixXcd& basis,
                            const std::optional<DriveTone>& field, int level, double t) {
  const int d = ops.dim();
  const double w = field ? field->frequency : 0.0;
  Eigen::VectorXcd v(d);
  for (int k = 0; k < d; ++k) {
    v(k) = std::polar(1.0, (ops.energies(k) - k * w) * t) * basis(k, level);
  }
  return v;
}

Segment gate_segment(double duration, double amp, double freq) {
  return Segment{duration, DriveTone{amp, freq, 0.0}};
}

}  // namespace

void RamseyConfig::validate() const {
  if (!(delta_t_max > 0.0) || !std::isfinite(delta_t_max)) {
    throw ValidationError("ramsey: delta_t_max must be positive");
  }
  if (n_steps < 8) throw ValidationError("ramsey: n_steps must be at least 8");
  if (!(gate_amp > 0.0) || !std::isfinite(gate_amp)) {
    throw ValidationError("ramsey: gate_amp must be positive");
  }
  if (!std::isfinite(gate_offset1) || !std::isfinite(gate_offset2)) {
    throw ValidationError("ramsey: gate offsets must be finite");
  }
  if (!(step_safety > 0.0)) throw ValidationError("ramsey: step_safety must be positive");
}

double RamseyConfig::gate_offset(int transition) const {
  if (transition == 1) return gate_offset1;
  if (transition == 2) return gate_offset2;
  throw ValidationError("ramsey: transition index must be 1 or 2");
}

double RamseyConfig::gate_freq(const QuditOperators& ops, int transition) const {
  return ops.omega(transition) + gate_offset(transition);
}

Eigen::MatrixXcd dressed_basis(const QuditOperators& ops, const std::optional<DriveTone>& field) {
  const int d = ops.dim();
  if (!field || field->amplitude == 0.0) return Eigen::MatrixXcd::Identity(d, d);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  for (int k = 0; k < d; ++k) h(k, k) = ops.energies(k) - k * field->frequency;
  const Complex phase = std::polar(1.0, field->phase);
  for (int k = 0; k + 1 < d; ++k) {
    h(k, k + 1) = 0.5 * field->amplitude * ops.coupling(k, k + 1) * phase;
    h(k + 1, k) = std::conj(h(k, k + 1));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw NumericError("dressed basis: eigensolver failed");
  Eigen::MatrixXcd out(d, d);
  std::vector<bool> used(static_cast<size_t>(d), false);
  for (int k = 0; k < d; ++k) {
    Eigen::Index best = 0;
    es.eigenvectors().row(k).cwiseAbs2().maxCoeff(&best);
    if (used[static_cast<size_t>(best)] || std::norm(es.eigenvectors()(k, best)) < 0.5) {
      throw NumericError("dressed basis: level " + std::to_string(k) +
                         " is strongly hybridized by the field");
    }
    used[static_cast<size_t>(best)] = true;
    out.col(k) = es.eigenvectors().col(best);
  }
  return out;
}

RamseyTrace ramsey_trace(const QuditOperators& ops, int transition,
                         const std::optional<DriveTone>& field, const RamseyConfig& config,
                         std::optional<double> shift_hint) {
  config.validate();
  if (transition != 1 && transition != 2) {
    throw ValidationError("ramsey: transition index must be 1 or 2");
  }
  if (transition == 2 && !shift_hint) {
    throw ValidationError("ramsey: transition 2 needs the measured first-transition shift");
  }
  if (field) field->validate();

  const double c01 = ops.coupling(0, 1);
  const double c12 = ops.coupling(1, 2);
  const double amp = config.gate_amp;
  const double ramsey_freq = config.gate_freq(ops, transition);
  const double ramsey_c = transition == 1 ? c01 : c12;
  const Segment half_pi = gate_segment(M_PI / (2.0 * amp * ramsey_c), amp, ramsey_freq);

  std::vector<Segment> opening;
  std::vector<Segment> closing;
  int measure_level = 1;
  if (transition == 1) {
    opening = {half_pi};
    closing = {half_pi};
  } else {
    const Segment shelve = gate_segment(M_PI / (amp * c01), amp, ops.omega(1) - *shift_hint);
    opening = {shelve, half_pi};
    closing = {half_pi, shelve};
    measure_level = 0;
  }

  EvolveOptions opts;
  opts.frame = Frame::interaction();
  opts.counter_rotating = config.counter_rotating;
  opts.step_safety = config.step_safety;
  opts.max_dt = config.delay_step() / 20.0;
  const DissipationSpec* diss = config.dissipation ? &*config.dissipation : nullptr;

  const Eigen::MatrixXcd basis = dressed_basis(ops, field);
  QuditState state = QuditState::pure(basis.col(0));

  Sequence prep{opening, field, 0};
  state = evolve(state, prep, ops, diss, opts);
  double t = prep.total_duration();

  const Sequence close{closing, field, measure_level};
  const double close_len = close.total_duration();

  RamseyTrace trace;
  trace.n_avg = 0;
  const double step = config.delay_step();
  double prev_delay = 0.0;
  for (int k = 0; k < config.n_steps; ++k) {
    const double delay = (k == config.n_steps - 1) ? config.delta_t_max : k * step;
    if (delay > prev_delay) {
      Sequence wait{{Segment{delay - prev_delay, std::nullopt}}, field, 0};
      opts.start_time = t;
      state = evolve(state, wait, ops, diss, opts);
      t += delay - prev_delay;
      prev_delay = delay;
    }
    opts.start_time = t;
    const QuditState final_state = evolve(state, close, ops, diss, opts);
    const Eigen::VectorXcd readout = dressed_at(ops, basis, field, measure_level, t + close_len);
    const double p = final_state.projection(readout);
    trace.delays.push_back(delay);
    trace.populations.push_back(std::clamp(p, 0.0, 1.0));
  }
  return trace;
}

}  // namespace qsense::dynamics
