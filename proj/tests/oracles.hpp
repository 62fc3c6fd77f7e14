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

// Reference computations used only by the tests. They are written
// independently of the library (own Hamiltonians, own eigensolves) so that
// agreement between the two is meaningful.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace qsense::oracle {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Large E_J/E_C expansion of the transmon level energies, GHz.
inline double asymptotic_level(double ej, double ec, int m) {
  return -ej + std::sqrt(8.0 * ej * ec) * (m + 0.5) - ec / 12.0 * (6.0 * m * m + 6.0 * m + 3.0);
}

struct ChargeBasisResult {
  Eigen::VectorXd energies;  // GHz, relative to the ground state
  Eigen::MatrixXd n_op;      // charge operator in the eigenbasis, scaled so |n01| = 1
};

/// Cooper-pair box H = 4 E_C (n - n_g)^2 - E_J cos(phi) in the charge basis.
inline ChargeBasisResult charge_basis(double ej, double ec, double ng, int cutoff, int keep) {
  const int dim = 2 * cutoff + 1;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd n = Eigen::MatrixXd::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) {
    const double charge = k - cutoff;
    h(k, k) = 4.0 * ec * (charge - ng) * (charge - ng);
    n(k, k) = charge;
    if (k + 1 < dim) h(k, k + 1) = h(k + 1, k) = -0.5 * ej;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const Eigen::MatrixXd v = es.eigenvectors().leftCols(keep);
  ChargeBasisResult r;
  r.energies = es.eigenvalues().head(keep).array() - es.eigenvalues()(0);
  r.n_op = v.transpose() * n * v;
  // Make the ladder elements positive, then normalize.
  std::vector<double> sign(static_cast<size_t>(keep), 1.0);
  for (int i = 1; i < keep; ++i) {
    sign[static_cast<size_t>(i)] = sign[static_cast<size_t>(i - 1)] * (r.n_op(i - 1, i) < 0 ? -1.0 : 1.0);
  }
  for (int i = 0; i < keep; ++i) {
    for (int j = 0; j < keep; ++j) r.n_op(i, j) *= sign[static_cast<size_t>(i)] * sign[static_cast<size_t>(j)];
  }
  r.n_op /= r.n_op(0, 1);
  return r;
}

struct Shifts {
  double delta1_mhz;
  double delta2_mhz;
};

/// RWA Floquet picture: diagonalize the static Hamiltonian in the frame
/// rotating at the field frequency and read off the two lowest transitions.
/// Positive shift means the transition moved down.
inline Shifts dressed_shifts(double amp_ghz, double freq_ghz, double ej, double ec,
                             int cutoff = 30, int keep = 7) {
  const ChargeBasisResult cb = charge_basis(ej, ec, 0.0, cutoff, keep);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(keep, keep);
  for (int i = 0; i < keep; ++i) h(i, i) = cb.energies(i) - i * freq_ghz;
  for (int i = 0; i + 1 < keep; ++i) h(i, i + 1) = h(i + 1, i) = 0.5 * amp_ghz * cb.n_op(i, i + 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  double e[3];
  for (int level = 0; level < 3; ++level) {
    Eigen::Index col = 0;
    es.eigenvectors().row(level).cwiseAbs2().maxCoeff(&col);
    e[level] = es.eigenvalues()(col) + level * freq_ghz;
  }
  const double bare1 = cb.energies(1);
  const double bare2 = cb.energies(2) - cb.energies(1);
  return {(bare1 - (e[1] - e[0])) * 1e3, (bare2 - (e[2] - e[1])) * 1e3};
}

/// exp(-i H t) for a 2x2 Hermitian matrix via its eigendecomposition.
inline Eigen::Matrix2cd expm_hermitian(const Eigen::Matrix2cd& h, double t) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
  Eigen::Vector2cd phases;
  for (int k = 0; k < 2; ++k) phases(k) = std::exp(std::complex<double>(0.0, -es.eigenvalues()(k) * t));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Two pi/2 pulses with common length t: a resonant, then b detuned by
/// det_b with relative phase phi. Rabi convention H = (Omega/2) sigma.
inline double two_pulse_p1(double omega_a, double omega_b, double det_b, double phi) {
  const double t = std::numbers::pi / (2.0 * omega_a);
  Eigen::Matrix2cd ha;
  ha << 0.0, 0.5 * omega_a, 0.5 * omega_a, 0.0;
  Eigen::Matrix2cd hb;
  hb << -0.5 * det_b, 0.5 * omega_b * std::polar(1.0, phi), 0.5 * omega_b * std::polar(1.0, -phi),
      0.5 * det_b;
  const Eigen::Matrix2cd u = expm_hermitian(hb, t) * expm_hermitian(ha, t);
  return std::norm(u(1, 0));
}

/// Bose-Einstein occupation written out directly.
inline double bose_einstein(double freq_hz, double temperature_k) {
  constexpr double h = 6.62607015e-34;
  constexpr double kb = 1.380649e-23;
  return 1.0 / (std::exp(h * freq_hz / (kb * temperature_k)) - 1.0);
}

}  // namespace qsense::oracle
