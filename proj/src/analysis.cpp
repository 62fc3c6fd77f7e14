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

#include "qsense/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>

#include "qsense/errors.hpp"
#include "qsense/units.hpp"

namespace qsense::analysis {

ShiftPair dressed_shift(const dynamics::DriveTone& field, const transmon::TransmonParams& params) {
  field.validate();
  const transmon::Diagonalization diag = transmon::diagonalize(params);
  const auto& energies = diag.spectrum.energies;
  const int d = static_cast<int>(energies.size());

  // Work in GHz: field frequency and amplitude converted from rad/ns.
  const double w = units::rad_ns_to_ghz(field.frequency);
  const double amp = units::rad_ns_to_ghz(field.amplitude);
  for (double t : diag.spectrum.transitions) {
    if (std::abs(w - t) <= amp / 5.0) {
      throw ValidationError("dressed_shift: field within A/5 of a transition at " +
                            std::to_string(t) + " GHz");
    }
  }
  if (amp == 0.0) return {};

  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(d, d);
  for (int i = 0; i < d; ++i) h(i, i) = energies[static_cast<size_t>(i)] - i * w;
  const std::complex<double> phase = std::polar(1.0, field.phase);
  for (int i = 0; i + 1 < d; ++i) {
    h(i, i + 1) = 0.5 * amp * diag.coupling.matrix(i, i + 1) * phase;
    h(i + 1, i) = std::conj(h(i, i + 1));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  if (es.info() != Eigen::Success) throw NumericError("dressed_shift: eigensolver failed");

  std::vector<double> dressed(3);
  std::vector<Eigen::Index> taken;
  for (int i = 0; i < 3; ++i) {
    Eigen::Index col = 0;
    const double overlap = es.eigenvectors().row(i).cwiseAbs2().maxCoeff(&col);
    if (overlap < 0.5) {
      throw NumericError("dressed_shift: overlap ambiguity for level " + std::to_string(i));
    }
    for (Eigen::Index c : taken) {
      if (c == col) throw NumericError("dressed_shift: two levels map to one dressed state");
    }
    taken.push_back(col);
    dressed[static_cast<size_t>(i)] = es.eigenvalues()(col) + i * w;
  }
  const auto& bare = diag.spectrum.transitions;
  const double shifted1 = dressed[1] - dressed[0];
  const double shifted2 = dressed[2] - dressed[1];
  return {units::ghz_to_rad_ns(bare[0] - shifted1), units::ghz_to_rad_ns(bare[1] - shifted2)};
}

AnharmonicModel AnharmonicModel::from(const dynamics::QuditOperators& ops) {
  if (ops.dim() < 4) throw ValidationError("AnharmonicModel: needs at least 4 levels");
  AnharmonicModel m;
  m.omega1 = ops.omega(1);
  m.anharmonicity = ops.omega(1) - ops.omega(2);
  for (int n = 1; n <= 3; ++n) {
    m.coupling.push_back(ops.coupling(n - 1, n));
    m.transitions.push_back(ops.omega(n));
  }
  return m;
}

ShiftPair perturbative_shift(const dynamics::DriveTone& field, const AnharmonicModel& model) {
  field.validate();
  if (!(model.omega1 > 0.0)) throw ValidationError("perturbative_shift: omega1 must be positive");
  if ((!model.coupling.empty() && model.coupling.size() < 3) ||
      (!model.transitions.empty() && model.transitions.size() < 3)) {
    throw ValidationError("perturbative_shift: overrides need entries for transitions 1..3");
  }
  auto element = [&](int n) {
    return model.coupling.empty() ? std::sqrt(static_cast<double>(n))
                                  : model.coupling[static_cast<size_t>(n - 1)];
  };
  auto transition = [&](int n) {
    return model.transitions.empty() ? model.omega1 - (n - 1) * model.anharmonicity
                                     : model.transitions[static_cast<size_t>(n - 1)];
  };

  // Second-order shift of level n from its neighbours n-1 and n+1.
  auto level_shift = [&](int n) {
    double s = 0.0;
    for (int m : {n, n + 1}) {
      if (m < 1) continue;
      const double g = 0.5 * field.amplitude * element(m);
      const double denom = transition(m) - field.frequency;
      if (std::abs(denom) < 1e-12) {
        throw NumericError("perturbative_shift: field resonant with transition " +
                           std::to_string(m));
      }
      s += (m == n ? 1.0 : -1.0) * g * g / denom;
    }
    return s;
  };
  const double s0 = level_shift(0);
  const double s1 = level_shift(1);
  const double s2 = level_shift(2);
  return {s0 - s1, s1 - s2};
}

void PhasePulsePair::validate() const {
  if (!(omega_a > 0.0)) throw ValidationError("phase pulses: omega_a must be positive");
  if (!(generalized_b() > 0.0)) {
    throw ValidationError("phase pulses: generalized Rabi frequency must be positive");
  }
}

double phase_p1(const PhasePulsePair& pair) {
  pair.validate();
  const double gen = pair.generalized_b();
  return 0.5 * (1.0 + pair.omega_b / gen * std::cos(pair.phi) +
                pair.detuning_b * pair.omega_b / (gen * gen) * std::sin(pair.phi));
}

namespace {

double matched_amplitude(double omega_a, double detuning) {
  if (!(omega_a > 0.0)) throw ValidationError("phase scan: omega_a must be positive");
  if (std::abs(detuning) >= omega_a) {
    throw ValidationError("phase scan: |detuning| must stay below omega_a for a realizable pulse");
  }
  return std::sqrt(omega_a * omega_a - detuning * detuning);
}

}  // namespace

std::vector<double> phase_scan(double omega_a, const std::vector<double>& detunings,
                               const std::function<double(double)>& phi_of_detuning) {
  std::vector<double> out;
  out.reserve(detunings.size());
  for (double det : detunings) {
    const PhasePulsePair pair{omega_a, matched_amplitude(omega_a, det), det, phi_of_detuning(det)};
    out.push_back(phase_p1(pair));
  }
  return out;
}

std::pair<double, double> invert_phase(double omega_a, double detuning, double p1) {
  const double omega_b = matched_amplitude(omega_a, detuning);
  // omega_a equals the generalized Rabi frequency of pulse b.
  const double r = omega_b / omega_a;
  const double d = detuning / omega_a;
  const double reach = r * std::hypot(1.0, d);
  const double anchor = std::atan2(d, 1.0);
  const double spread = std::acos(std::clamp((2.0 * p1 - 1.0) / reach, -1.0, 1.0));
  return {anchor + spread, anchor - spread};
}

double recover_linear_phase(double omega_a, const std::vector<double>& detunings,
                            const std::vector<double>& p1) {
  if (detunings.size() != p1.size() || detunings.empty()) {
    throw ValidationError("recover_linear_phase: detunings and p1 must match and be non-empty");
  }
  std::vector<std::pair<double, double>> roots;
  roots.reserve(detunings.size());
  for (size_t k = 0; k < detunings.size(); ++k) {
    roots.push_back(invert_phase(omega_a, detunings[k], p1[k]));
  }
  double best_slope = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int neg_branch = 0; neg_branch < 2; ++neg_branch) {
    for (int pos_branch = 0; pos_branch < 2; ++pos_branch) {
      double sxx = 0.0;
      double sxy = 0.0;
      std::vector<double> phi(detunings.size());
      for (size_t k = 0; k < detunings.size(); ++k) {
        const int branch = detunings[k] < 0.0 ? neg_branch : pos_branch;
        phi[k] = branch == 0 ? roots[k].first : roots[k].second;
        sxx += detunings[k] * detunings[k];
        sxy += detunings[k] * phi[k];
      }
      if (sxx == 0.0) throw ValidationError("recover_linear_phase: all detunings are zero");
      const double slope = sxy / sxx;
      double cost = 0.0;
      for (size_t k = 0; k < detunings.size(); ++k) {
        cost += std::pow(phi[k] - slope * detunings[k], 2);
      }
      if (cost < best_cost) {
        best_cost = cost;
        best_slope = slope;
      }
    }
  }
  return best_slope;
}

double thermal_photons(double freq_ghz, double temperature_k) {
  if (!(temperature_k > 0.0)) throw ValidationError("thermal_photons: temperature must be positive");
  if (!(freq_ghz > 0.0)) throw ValidationError("thermal_photons: frequency must be positive");
  const double x = units::kPlanck * freq_ghz * 1e9 / (units::kBoltzmann * temperature_k);
  return 1.0 / std::expm1(x);
}

double NoiseModel::thermal_offset_khz() const {
  return thermal_photons(resonator_ghz, temperature_k) * chi_khz;
}

double snr_sigma(double n_avg, double a, double c) {
  if (!(n_avg >= 1.0)) throw ValidationError("snr_sigma: n_avg must be at least 1");
  return a / std::sqrt(n_avg) + c;
}

std::vector<Eigen::VectorXd> high_power_population(const dynamics::QuditOperators& ops,
                                                   const std::vector<double>& amplitudes,
                                                   double detuning, double duration) {
  if (ops.dim() < 7) throw ValidationError("high_power_population: needs d_keep >= 7");
  if (!(duration > 0.0)) throw ValidationError("high_power_population: duration must be positive");
  std::vector<Eigen::VectorXd> out;
  for (double amp : amplitudes) {
    dynamics::Sequence seq;
    seq.field = dynamics::DriveTone{amp, ops.omega(1) + detuning, 0.0};
    seq.segments = {dynamics::Segment{duration, std::nullopt}};

    dynamics::EvolveOptions opts;
    opts.frame = dynamics::Frame::interaction();
    opts.counter_rotating = true;

    const dynamics::QuditState start = dynamics::QuditState::basis(ops.dim(), 0);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(ops.dim());
    Eigen::VectorXd last = start.populations();
    double last_t = 0.0;
    // Trapezoidal time average over the integrator steps.
    dynamics::evolve(start, seq, ops, nullptr, opts, [&](double t, const dynamics::QuditState& s) {
      const Eigen::VectorXd now = s.populations();
      sum += 0.5 * (t - last_t) * (now + last);
      last = now;
      last_t = t;
    });
    out.push_back(sum / duration);
  }
  return out;
}

}  // namespace qsense::analysis
