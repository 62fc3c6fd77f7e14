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

#include <random>

#include "qsense/errors.hpp"
#include "qsense/ramsey.hpp"

namespace qsense::dynamics {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RamseyTrace add_measurement_noise(const RamseyTrace& trace, long n_avg, std::uint64_t seed) {
  if (n_avg < 1) throw ValidationError("noise: n_avg must be at least 1");
  RamseyTrace out = trace;
  out.n_avg = n_avg;
  for (size_t k = 0; k < trace.populations.size(); ++k) {
    const double p = trace.populations[k];
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("noise: populations must lie in [0, 1]");
    if (p == 0.0 || p == 1.0) continue;
    std::mt19937_64 gen(mix_seed(seed, k));
    std::binomial_distribution<long> shots(n_avg, p);
    out.populations[k] = static_cast<double>(shots(gen)) / static_cast<double>(n_avg);
  }
  return out;
}

}  // namespace qsense::dynamics
