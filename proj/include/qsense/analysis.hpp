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

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qsense/dynamics.hpp"
#include "qsense/transmon.hpp"

namespace qsense::analysis {

/// Transition shifts (rad/ns) with the convention shifted = bare - delta.
struct ShiftPair {
  double delta1 = 0.0;
  double delta2 = 0.0;
};

/// Shifts from the time-independent rotating-wave Hamiltonian in the frame
/// of the field: diagonal E_i - i w_F, ladder couplings A c_{i,i+1} / 2.
/// Dressed levels are matched to bare ones by maximal overlap. Throws
/// ValidationError when the field lies within A/5 of a transition and
/// NumericError when a level has no dominant bare component (< 0.5).
ShiftPair dressed_shift(const dynamics::DriveTone& field, const transmon::TransmonParams& params);

/// Ladder description used by the perturbative model. By default
/// transition n has frequency omega1 - (n - 1) * anharmonicity (rad/ns) and
/// ladder element sqrt(n) (Duffing oscillator); either can be overridden
/// with the values of a real device for n = 1, 2, 3.
struct AnharmonicModel {
  double omega1 = 0.0;
  double anharmonicity = 0.0;
  std::vector<double> coupling;     // c_{n-1,n}
  std::vector<double> transitions;  // rad/ns

  /// Transmon ladder: exact transition frequencies and matrix elements.
  static AnharmonicModel from(const dynamics::QuditOperators& ops);
};

/// Second-order perturbative shifts of the two lowest transitions for a
/// classical drive on the Duffing ladder (rotating-wave couplings A c / 2).
/// This is the approximate model; it loses kHz accuracy at strong drive.
ShiftPair perturbative_shift(const dynamics::DriveTone& field, const AnharmonicModel& model);

/// Two pi/2 pulses: a resonant one (Rabi rate omega_a) followed by one
/// detuned by detuning_b with Rabi rate omega_b and relative phase phi.
struct PhasePulsePair {
  double omega_a = 0.0;
  double omega_b = 0.0;
  double detuning_b = 0.0;
  double phi = 0.0;

  double generalized_b() const { return std::hypot(omega_b, detuning_b); }
  void validate() const;
};

/// Closed-form excited-state probability after the pulse pair:
/// (1 + (W_b / W~_b) cos phi + (D_b W_b / W~_b^2) sin phi) / 2.
double phase_p1(const PhasePulsePair& pair);

/// p1 along a detuning scan. For every detuning the second pulse amplitude
/// is sqrt(omega_a^2 - detuning^2), so both pulses share the same duration.
/// Throws ValidationError for |detuning| >= omega_a.
std::vector<double> phase_scan(double omega_a, const std::vector<double>& detunings,
                               const std::function<double(double)>& phi_of_detuning);

/// Both phases compatible with a measured p1 at one scan detuning.
std::pair<double, double> invert_phase(double omega_a, double detuning, double p1);

/// Recovers the slope k of a phase profile phi = k * detuning from a phase
/// scan by pointwise inversion, selecting the branch on each side of zero
/// detuning that is most consistent with a line through the origin.
double recover_linear_phase(double omega_a, const std::vector<double>& detunings,
                            const std::vector<double>& p1);

/// Bose-Einstein occupation of a mode at frequency f (GHz) and temperature T (K).
double thermal_photons(double freq_ghz, double temperature_k);

/// Readout and noise parameters of the measured device. Rates in kHz.
struct NoiseModel {
  double a1_khz = 355.0;
  double a2_khz = 537.0;
  double c1_khz = 0.12;
  double c2_khz = 2.20;
  double chi_khz = 230.4 / 0.985;
  double chi_over_kappa = 0.08;
  double resonator_ghz = 6.878;
  double temperature_k = 0.075;

  double kappa_khz() const { return chi_khz / chi_over_kappa; }
  /// Frequency offset n_bar * chi for the configured temperature.
  double thermal_offset_khz() const;
};

/// sigma = a / sqrt(n_avg) + c.
double snr_sigma(double n_avg, double a, double c);

/// Time-averaged level populations for a qudit starting in |0> under the
/// field alone, switched on at t = 0, at frequency omega_1 + detuning.
/// Full Hamiltonian including counter-rotating terms.
std::vector<Eigen::VectorXd> high_power_population(const dynamics::QuditOperators& ops,
                                                   const std::vector<double>& amplitudes,
                                                   double detuning, double duration = 800.0);

}  // namespace qsense::analysis
