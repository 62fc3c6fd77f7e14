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

#include "qsense/transmon.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "qsense/errors.hpp"

namespace qsense::transmon {

namespace {

struct RawSolution {
  Eigen::VectorXd energies;   // lowest d_keep, absolute
  Eigen::MatrixXd vectors;    // charge basis x d_keep
  Eigen::VectorXd charges;    // n for each basis state
};

RawSolution solve_charge_basis(double e_j, double e_c, double n_g, int cutoff, int d_keep) {
  const int dim = 2 * cutoff + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd charges(dim);
  for (int k = 0; k < dim; ++k) {
    const double n = static_cast<double>(k - cutoff);
    charges(k) = n;
    h(k, k) = 4.0 * e_c * (n - n_g) * (n - n_g);
    if (k + 1 < dim) {
      h(k, k + 1) = -0.5 * e_j;
      h(k + 1, k) = -0.5 * e_j;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) {
    throw NumericError("transmon eigensolver did not converge");
  }
  RawSolution out;
  out.energies = solver.eigenvalues().head(d_keep);
  out.vectors = solver.eigenvectors().leftCols(d_keep);
  out.charges = charges;
  return out;
}

// Two lowest transitions, used by the Newton solver.
Eigen::Vector2d lowest_transitions(double e_j, double e_c, const TransmonParams& p) {
  const RawSolution s = solve_charge_basis(e_j, e_c, p.n_g, p.charge_cutoff, 3);
  return {s.energies(1) - s.energies(0), s.energies(2) - s.energies(1)};
}

}  // namespace

void TransmonParams::validate() const {
  if (!(e_j > 0.0) || !(e_c > 0.0)) {
    throw ValidationError("transmon: e_j and e_c must be positive");
  }
  if (!(e_j / e_c > 1.0)) {
    throw ValidationError("transmon: e_j/e_c must exceed 1 (transmon regime)");
  }
  if (d_keep < 3) {
    throw ValidationError("transmon: d_keep must be at least 3");
  }
  if (charge_cutoff < 3 * d_keep) {
    throw ValidationError("transmon: charge_cutoff must be at least 3*d_keep");
  }
  if (!std::isfinite(n_g)) {
    throw ValidationError("transmon: n_g must be finite");
  }
}

Diagonalization diagonalize(const TransmonParams& params, bool check_convergence) {
  params.validate();
  const int d = params.d_keep;
  RawSolution s = solve_charge_basis(params.e_j, params.e_c, params.n_g, params.charge_cutoff, d);

  if (check_convergence) {
    const RawSolution wider =
        solve_charge_basis(params.e_j, params.e_c, params.n_g, params.charge_cutoff + 5, d);
    for (int i = 1; i < d; ++i) {
      const double e_now = s.energies(i) - s.energies(0);
      const double e_wide = wider.energies(i) - wider.energies(0);
      if (std::abs(e_wide - e_now) > 1e-8 * std::abs(e_wide)) {
        throw NumericError("transmon: charge_cutoff " + std::to_string(params.charge_cutoff) +
                           " is too small, level " + std::to_string(i) + " not converged");
      }
    }
  }

  Eigen::MatrixXd n_eig = s.vectors.transpose() * s.charges.asDiagonal() * s.vectors;
  // Fix eigenvector signs so that the ladder elements n_{i,i+1} are positive.
  for (int i = 1; i < d; ++i) {
    if (n_eig(i - 1, i) < 0.0) {
      s.vectors.col(i) *= -1.0;
      n_eig.row(i) *= -1.0;
      n_eig.col(i) *= -1.0;
    }
  }
  const double n01 = n_eig(0, 1);
  if (!(std::abs(n01) > 0.0)) {
    throw NumericError("transmon: vanishing 0-1 charge matrix element");
  }
  Eigen::MatrixXd coupling = n_eig / n01;
  coupling = 0.5 * (coupling + coupling.transpose()).eval();
  coupling(0, 1) = 1.0;
  coupling(1, 0) = 1.0;

  Diagonalization out;
  out.spectrum.energies.resize(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    out.spectrum.energies[static_cast<size_t>(i)] = s.energies(i) - s.energies(0);
  }
  for (int i = 1; i < d; ++i) {
    out.spectrum.transitions.push_back(out.spectrum.energies[static_cast<size_t>(i)] -
                                       out.spectrum.energies[static_cast<size_t>(i - 1)]);
  }
  out.spectrum.anharmonicity = out.spectrum.transitions[0] - out.spectrum.transitions[1];
  out.coupling.matrix = std::move(coupling);
  return out;
}

double asymptotic_energy(double e_j, double e_c, int level) {
  const double i = static_cast<double>(level);
  return -e_j + std::sqrt(8.0 * e_j * e_c) * (i + 0.5) -
         e_c / 12.0 * (6.0 * i * i + 6.0 * i + 3.0);
}

TransmonParams fit_ej_ec(double omega1_ghz, double omega2_ghz, double n_g, int charge_cutoff,
                         int d_keep) {
  if (!(omega2_ghz > 0.0) || !(omega1_ghz > omega2_ghz)) {
    throw ValidationError(
        "fit_ej_ec: need omega1 > omega2 > 0 (a transmon has negative anharmonicity)");
  }
  TransmonParams p;
  p.n_g = n_g;
  p.charge_cutoff = charge_cutoff;
  p.d_keep = d_keep;

  // Asymptotic expansion: omega1 = sqrt(8 EJ EC) - EC, omega2 = omega1 - EC.
  double e_c = omega1_ghz - omega2_ghz;
  double e_j = (omega1_ghz + e_c) * (omega1_ghz + e_c) / (8.0 * e_c);
  if (!(e_j / e_c > 1.0)) {
    throw ValidationError("fit_ej_ec: targets are inconsistent with the transmon regime");
  }
  p.e_j = e_j;
  p.e_c = e_c;
  p.validate();

  const Eigen::Vector2d target(omega1_ghz, omega2_ghz);
  Eigen::Vector2d residual = lowest_transitions(e_j, e_c, p) - target;
  constexpr double kTol = 1e-12;
  for (int iter = 0; iter < 100; ++iter) {
    if (residual.lpNorm<Eigen::Infinity>() < kTol) {
      p.e_j = e_j;
      p.e_c = e_c;
      return p;
    }
    Eigen::Matrix2d jac;
    const double hj = 1e-6 * e_j;
    const double hc = 1e-6 * e_c;
    jac.col(0) = (lowest_transitions(e_j + hj, e_c, p) - lowest_transitions(e_j - hj, e_c, p)) /
                 (2.0 * hj);
    jac.col(1) = (lowest_transitions(e_j, e_c + hc, p) - lowest_transitions(e_j, e_c - hc, p)) /
                 (2.0 * hc);
    const Eigen::Vector2d step = jac.fullPivLu().solve(-residual);
    if (!step.allFinite()) {
      throw NumericError("fit_ej_ec: singular Jacobian");
    }
    // Damped update: halve until the residual shrinks and the regime holds.
    double scale = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      const double ej_try = e_j + scale * step(0);
      const double ec_try = e_c + scale * step(1);
      if (ec_try > 0.0 && ej_try / ec_try > 1.0) {
        const Eigen::Vector2d r_try = lowest_transitions(ej_try, ec_try, p) - target;
        if (r_try.norm() < residual.norm() || r_try.lpNorm<Eigen::Infinity>() < kTol) {
          e_j = ej_try;
          e_c = ec_try;
          residual = r_try;
          accepted = true;
          break;
        }
      }
      scale *= 0.5;
    }
    if (!accepted) {
      throw NumericError("fit_ej_ec: Newton step failed to reduce the residual");
    }
  }
  throw NumericError("fit_ej_ec: no convergence in 100 iterations");
}

void to_json(nlohmann::json& j, const TransmonParams& p) {
  j = nlohmann::json{{"e_j_ghz", p.e_j},
                     {"e_c_ghz", p.e_c},
                     {"n_g", p.n_g},
                     {"charge_cutoff", p.charge_cutoff},
                     {"d_keep", p.d_keep}};
}

void from_json(const nlohmann::json& j, TransmonParams& p) {
  p.e_j = j.at("e_j_ghz").get<double>();
  p.e_c = j.at("e_c_ghz").get<double>();
  p.n_g = j.value("n_g", 0.0);
  p.charge_cutoff = j.value("charge_cutoff", 30);
  p.d_keep = j.value("d_keep", 7);
}

}  // namespace qsense::transmon
