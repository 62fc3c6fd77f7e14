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

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qsense/trace.hpp"

namespace qsense::fitting {

/// Identifier of the trace model below, recorded in lookup-table metadata.
inline constexpr const char* kModelId = "damped-sine-7";

/// Result of fitting p(t) = a exp(-t/tau) sin(w t + phi) + b exp(-t/tau_b) + c.
/// Internally the decays are fitted as rates; covariance refers to the
/// parameter vector (a, 1/tau, w, phi, b, 1/tau_b, c).
struct DampedSineFit {
  double omega_r = 0.0;  // rad/ns, >= 0
  double sigma_r = 0.0;  // rad/ns, standard error of omega_r
  double amplitude = 0.0;
  double decay_tau = 0.0;  // ns, capped at 1e12 for undamped traces
  double phase0 = 0.0;
  double offset_amp = 0.0;
  double offset_tau = 0.0;  // ns
  double offset_const = 0.0;
  Eigen::Matrix<double, 7, 7> covariance = Eigen::Matrix<double, 7, 7>::Zero();
  double rms_residual = 0.0;
  int iterations = 0;

  double evaluate(double t) const;
};

struct FitOptions {
  /// Accept traces with fewer than 1.25 oscillation periods. Used for
  /// noiseless table traces; the fit then starts from several frequencies.
  bool allow_sub_period = false;
  int max_iterations = 200;
  /// Optional starting frequency (rad/ns) replacing the Fourier estimate.
  std::optional<double> omega_guess;
};

/// Levenberg-Marquardt fit of the damped-sine model. The initial frequency
/// is the dominant peak of the zero-padded Fourier transform of the
/// mean-subtracted trace. Throws NoOscillationError when that peak is below
/// 1.25 periods over the window (unless allowed) and NumericError when the
/// iteration does not converge within max_iterations, even after a restart
/// one frequency bin to either side.
DampedSineFit fit_damped_sine(const RamseyTrace& trace, const FitOptions& options = {});

/// Dominant frequency (rad/ns) of the mean-subtracted trace.
double fourier_peak(const RamseyTrace& trace);

struct ShiftMeasurement {
  int transition = 1;
  double delta = 0.0;  // rad/ns
  double sigma = 0.0;  // rad/ns
  double gate_freq = 0.0;
  double bare_freq = 0.0;
};

/// delta = omega_r - (gate_freq - bare_freq).
ShiftMeasurement extract_shift(const DampedSineFit& fit, double gate_freq, double bare_freq,
                               int transition);

struct SigmaScaling {
  double a = 0.0;
  double c = 0.0;
  double a_err = 0.0;
  double c_err = 0.0;
};

/// Least-squares fit of sigma(N) = a / sqrt(N) + c to (n_avg, sigma) points.
SigmaScaling fit_sigma_scaling(const std::vector<std::pair<double, double>>& points);

struct PowerLaw {
  double prefactor = 0.0;
  double exponent = 0.0;
  double exponent_err = 0.0;
};

/// Log-log regression sigma(N) = prefactor * N^exponent.
PowerLaw fit_power_law(const std::vector<std::pair<double, double>>& points);

}  // namespace qsense::fitting
