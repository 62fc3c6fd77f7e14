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

#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace qsense::transmon {

/// Circuit definition of a fixed-frequency transmon. Energies are in GHz
/// with h = 1, so E_J = 12.5 means E_J / h = 12.5 GHz.
struct TransmonParams {
  double e_j = 0.0;
  double e_c = 0.0;
  double n_g = 0.0;
  int charge_cutoff = 30;  // charge basis spans n = -cutoff ... +cutoff
  int d_keep = 7;          // eigenlevels retained for dynamics

  /// Throws ValidationError when the parameters leave the transmon regime
  /// or the basis is too small for the requested number of levels.
  void validate() const;
};

struct Spectrum {
  std::vector<double> energies;     // GHz, energies[0] == 0
  std::vector<double> transitions;  // transitions[i] = E_{i+1} - E_i, GHz
  double anharmonicity = 0.0;       // transitions[0] - transitions[1], GHz

  double omega(int i) const { return transitions.at(static_cast<size_t>(i - 1)); }
};

/// Charge operator in the transmon eigenbasis, rescaled so that the 0-1
/// element is exactly one. Plays the role of (b + b^dagger).
struct CouplingOperator {
  Eigen::MatrixXd matrix;
};

struct Diagonalization {
  Spectrum spectrum;
  CouplingOperator coupling;
};

/// Exact spectrum and coupling matrix from the charge-basis Hamiltonian
/// 4 E_C (n - n_g)^2 - E_J cos(phi). When `check_convergence` is set the
/// basis is enlarged by five charge states and any relative energy change
/// above 1e-8 raises NumericError.
Diagonalization diagonalize(const TransmonParams& params, bool check_convergence = true);

/// Solves for (E_J, E_C) that reproduce the two lowest transition
/// frequencies (GHz) to better than 1e-12 GHz. Newton iteration with a
/// central-difference Jacobian, started from the asymptotic transmon
/// expressions. `n_g`, `charge_cutoff` and `d_keep` are carried through.
TransmonParams fit_ej_ec(double omega1_ghz, double omega2_ghz, double n_g = 0.0,
                         int charge_cutoff = 30, int d_keep = 7);

/// Eigenenergy of level i from the large E_J/E_C expansion, GHz, without
/// the E_0 offset removed.
double asymptotic_energy(double e_j, double e_c, int level);

void to_json(nlohmann::json& j, const TransmonParams& p);
void from_json(const nlohmann::json& j, TransmonParams& p);

}  // namespace qsense::transmon
