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

#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qsense/transmon.hpp"

namespace qsense::dynamics {

using Complex = std::complex<double>;

/// A classical microwave tone A cos(w t + phi) multiplying the coupling
/// operator. Amplitude and frequency are angular (rad/ns); time t is the
/// absolute simulation time, so tones stay phase continuous across segments.
struct DriveTone {
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;

  void validate() const;
};

struct Segment {
  double duration = 0.0;  // ns
  std::optional<DriveTone> gate;
};

/// Pulse program. The field tone, when present, is on during every segment.
struct Sequence {
  std::vector<Segment> segments;
  std::optional<DriveTone> field;
  int measure_level = 0;

  double total_duration() const;
  void validate(int dim) const;
};

/// Energies (rad/ns, ground state at 0) and the normalized coupling matrix.
struct QuditOperators {
  Eigen::VectorXd energies;
  Eigen::MatrixXd coupling;

  static QuditOperators from(const transmon::Diagonalization& diag);
  /// Keeps only the lowest `dim` levels.
  QuditOperators truncated(int dim) const;
  int dim() const { return static_cast<int>(energies.size()); }
  /// Transition frequency between levels i-1 and i, rad/ns.
  double omega(int i) const { return energies(i) - energies(i - 1); }
};

/// Per-level decay constants, ns. relaxation[i] is T1 of level i (decay to
/// i-1, entry 0 ignored). dephasing[i] is the pure-dephasing time of level
/// i relative to the ground state. Missing or non-finite entries mean none.
struct DissipationSpec {
  std::vector<double> relaxation;
  std::vector<double> dephasing;

  void validate(int dim) const;
  bool empty() const;
};

/// Pure state vector or density matrix of the qudit.
class QuditState {
 public:
  static QuditState basis(int dim, int level);
  static QuditState pure(Eigen::VectorXcd amplitudes);
  static QuditState mixed(Eigen::MatrixXcd density);

  bool is_pure() const { return pure_; }
  int dim() const;
  const Eigen::VectorXcd& amplitudes() const;
  const Eigen::MatrixXcd& density() const;
  Eigen::VectorXcd& amplitudes_mut() { return psi_; }
  Eigen::MatrixXcd& density_mut() { return rho_; }

  QuditState as_density() const;
  Eigen::VectorXd populations() const;
  /// <v|rho|v> for a normalized vector v.
  double projection(const Eigen::VectorXcd& v) const;
  /// Norm squared (pure) or trace (mixed).
  double weight() const;
  /// Throws NumericError when the state is not normalized to `tol`, or,
  /// for density matrices, not Hermitian / positive semidefinite.
  void check(double tol = 1e-9) const;

 private:
  bool pure_ = true;
  Eigen::VectorXcd psi_;
  Eigen::MatrixXcd rho_;
};

/// Frame in which states are expressed. A state in frame f has
/// amplitudes c_k = exp(i f_k t) * (lab amplitude), with per-level rates
///   lab:          f_k = 0
///   rotating:     f_k = k * reference
///   interaction:  f_k = E_k
struct Frame {
  enum class Kind { Lab, Rotating, Interaction };
  Kind kind = Kind::Interaction;
  double reference = 0.0;  // rad/ns, rotating frame only

  static Frame lab() { return {Kind::Lab, 0.0}; }
  static Frame rotating(double reference) { return {Kind::Rotating, reference}; }
  static Frame interaction() { return {Kind::Interaction, 0.0}; }

  Eigen::VectorXd rates(const QuditOperators& ops) const;
};

/// Re-expresses a state given in frame `from` at absolute time t in frame `to`.
QuditState change_frame(const QuditState& state, const QuditOperators& ops, const Frame& from,
                        const Frame& to, double t);

struct EvolveOptions {
  Frame frame = Frame::interaction();
  bool counter_rotating = true;  // false drops non-resonant terms (RWA)
  double start_time = 0.0;       // absolute time of the first segment, ns
  double dt = 0.0;               // fixed step; 0 selects it from the fastest rate
  double step_safety = 0.1;      // automatic dt = step_safety / fastest rate
  double max_dt = 1.0;           // upper bound for the automatic step, ns
};

/// Called after every accepted step with (absolute time, state).
using Observer = std::function<void(double, const QuditState&)>;

/// Integrates the Schroedinger equation (or the Lindblad equation when
/// `dissipation` is non-empty, promoting a pure state to a density matrix)
/// with fixed-step RK4 over all segments. Stepping happens in the
/// interaction picture; input, output and observed states are expressed in
/// `options.frame`. Throws NumericError when the norm drifts by more than
/// 1e-6 over a segment.
QuditState evolve(const QuditState& state, const Sequence& seq, const QuditOperators& ops,
                  const DissipationSpec* dissipation, const EvolveOptions& options,
                  const Observer& observer = {});

/// The step evolve() would use for a segment carrying these tones.
double automatic_step(const QuditOperators& ops, const std::vector<DriveTone>& tones,
                      const EvolveOptions& options);

}  // namespace qsense::dynamics
