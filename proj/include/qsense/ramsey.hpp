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

#include <cstdint>
#include <optional>

#include "qsense/dynamics.hpp"
#include "qsense/trace.hpp"

namespace qsense::dynamics {

/// Settings shared by the first- and second-transition Ramsey pipelines.
/// Gates are rectangular at amplitude `gate_amp`; a pulse of area theta on
/// transition i lasts theta / (gate_amp * c_{i-1,i}).
struct RamseyConfig {
  double delta_t_max = 800.0;                 // ns
  int n_steps = 80;                           // delays k * delta_t_max / (n_steps - 1)
  double gate_amp = 2.0 * M_PI * 0.030;       // rad/ns
  double gate_offset1 = 0.0;                  // rad/ns, gate detuning from omega_1
  double gate_offset2 = 0.0;                  // rad/ns, gate detuning from omega_2
  bool counter_rotating = false;              // keep the field/gate counter-rotating terms
  double step_safety = 0.1;
  std::optional<DissipationSpec> dissipation;

  void validate() const;
  double delay_step() const { return delta_t_max / static_cast<double>(n_steps - 1); }
  /// Gate frequency for transition 1 or 2, rad/ns.
  double gate_freq(const QuditOperators& ops, int transition) const;
  double gate_offset(int transition) const;
};

/// Simulated noiseless Ramsey trace for transition 1 (pi/2 - delay - pi/2 on
/// 0-1, population of level 1) or transition 2 (pi on 0-1 at omega_1 -
/// shift_hint, pi/2 - delay - pi/2 on 1-2, pi on 0-1 again, population of
/// level 0). The field, if any, is on throughout; the qudit starts in the
/// field-dressed ground state and levels are read out in the dressed basis.
RamseyTrace ramsey_trace(const QuditOperators& ops, int transition,
                         const std::optional<DriveTone>& field, const RamseyConfig& config,
                         std::optional<double> shift_hint = std::nullopt);

/// Eigenvectors of the rotating-wave Hamiltonian in the frame of `field`,
/// column k being the dressed state connected to bare level k. Without a
/// field this is the identity.
Eigen::MatrixXcd dressed_basis(const QuditOperators& ops, const std::optional<DriveTone>& field);

/// Replaces each population by the mean of n_avg Bernoulli draws. Point k
/// uses a generator seeded from (seed, k) only, so results do not depend on
/// evaluation order.
RamseyTrace add_measurement_noise(const RamseyTrace& trace, long n_avg, std::uint64_t seed);

/// SplitMix64 finalizer of (seed, stream); used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace qsense::dynamics
