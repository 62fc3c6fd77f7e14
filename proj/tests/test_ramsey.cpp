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

#include <doctest.h>

#include "oracles.hpp"
#include "qsense/errors.hpp"
#include "qsense/fitting.hpp"
#include "qsense/lookup.hpp"
#include "qsense/ramsey.hpp"
#include "qsense/units.hpp"

using namespace qsense;
using namespace qsense::dynamics;

namespace {

constexpr double kEj = 12.508606;
constexpr double kEc = 0.244181;

QuditOperators device_ops() {
  return QuditOperators::from(transmon::diagonalize({kEj, kEc, 0.0, 30, 7}));
}

RamseyConfig offset_config() {
  RamseyConfig cfg;
  cfg.gate_offset1 = units::mhz_to_rad_ns(2.0);
  cfg.gate_offset2 = units::mhz_to_rad_ns(2.0);
  return cfg;
}

}  // namespace

TEST_CASE("without a field the fringe frequency equals the gate offset") {
  const auto ops = device_ops();
  const auto cfg = offset_config();
  const auto trace = ramsey_trace(ops, 1, std::nullopt, cfg);
  REQUIRE(trace.size() == 80);
  CHECK(trace.delays.back() == doctest::Approx(800.0));
  const auto fit = fitting::fit_damped_sine(trace);
  CHECK(std::abs(units::rad_ns_to_khz(fit.omega_r) - 2000.0) < 5.0);
}

TEST_CASE("time-domain shifts agree with the dressed-state oracle") {
  const auto ops = device_ops();
  const DriveTone field{units::ghz_to_rad_ns(0.097), units::ghz_to_rad_ns(5.297), 0.0};
  const auto m = lookup::measure_shifts(ops, field, offset_config(), {});
  const auto ref = oracle::dressed_shifts(0.097, 5.297, kEj, kEc);
  CHECK(std::abs(units::rad_ns_to_khz(m.first.delta) - 1e3 * ref.delta1_mhz) < 5.0);
  CHECK(std::abs(units::rad_ns_to_khz(m.second.delta) - 1e3 * ref.delta2_mhz) < 5.0);
}

TEST_CASE("measurement noise is binomial and seeded") {
  const auto ops = device_ops();
  const auto clean = ramsey_trace(ops, 1, std::nullopt, offset_config());
  const auto a = add_measurement_noise(clean, 3000, 42);
  const auto b = add_measurement_noise(clean, 3000, 42);
  const auto c = add_measurement_noise(clean, 3000, 43);
  CHECK(a.populations == b.populations);
  CHECK(a.populations != c.populations);
  CHECK(a.n_avg == 3000);
  double sq = 0.0, expected = 0.0;
  for (size_t k = 0; k < a.size(); ++k) {
    const double counts = a.populations[k] * 3000.0;
    CHECK(std::abs(counts - std::round(counts)) < 1e-6);
    const double p = clean.populations[k];
    sq += (a.populations[k] - p) * (a.populations[k] - p);
    expected += p * (1 - p) / 3000.0;
  }
  CHECK(sq / expected == doctest::Approx(1.0).epsilon(0.4));
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}

TEST_CASE("dressed basis is unitary and reduces to the bare basis") {
  const auto ops = device_ops();
  CHECK(dressed_basis(ops, std::nullopt).isIdentity());
  const DriveTone far{units::ghz_to_rad_ns(0.05), units::ghz_to_rad_ns(5.4), 0.0};
  const Eigen::MatrixXcd v = dressed_basis(ops, far);
  CHECK((v.adjoint() * v - Eigen::MatrixXcd::Identity(v.cols(), v.cols())).norm() < 1e-10);
}

TEST_CASE("ramsey configuration validation") {
  RamseyConfig cfg;
  cfg.n_steps = 5;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = RamseyConfig{};
  cfg.delta_t_max = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  const auto ops = device_ops();
  CHECK_THROWS_AS(ramsey_trace(ops, 3, std::nullopt, RamseyConfig{}), ValidationError);
}
