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

// Serial reference loop versus the OpenMP table fill on a small grid.

#include <benchmark/benchmark.h>
#include <omp.h>

#include "qsense/lookup.hpp"
#include "qsense/units.hpp"

namespace {

using namespace qsense;

lookup::PipelineConfig pipeline() {
  lookup::PipelineConfig cfg;
  cfg.transmon = {12.508606, 0.244181, 0.0, 30, 7};
  cfg.ramsey.gate_offset1 = units::mhz_to_rad_ns(2.0);
  cfg.ramsey.gate_offset2 = units::mhz_to_rad_ns(2.0);
  return cfg;
}

lookup::GridSpec grid(int rows, int cols) {
  return {units::ghz_to_rad_ns(0.05), units::ghz_to_rad_ns(0.12), rows,
          units::ghz_to_rad_ns(5.2), units::ghz_to_rad_ns(5.6), cols};
}

void BM_FillSerial(benchmark::State& state) {
  const auto spec = grid(2, static_cast<int>(state.range(0)));
  lookup::GenerateOptions opts;
  opts.parallel = false;
  for (auto _ : state) benchmark::DoNotOptimize(lookup::generate(spec, pipeline(), opts));
  state.counters["points"] = 2.0 * static_cast<double>(state.range(0));
}

void BM_FillParallel(benchmark::State& state) {
  const auto spec = grid(2, static_cast<int>(state.range(0)));
  lookup::GenerateOptions opts;
  for (auto _ : state) benchmark::DoNotOptimize(lookup::generate(spec, pipeline(), opts));
  state.counters["points"] = 2.0 * static_cast<double>(state.range(0));
  state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(BM_FillSerial)->Arg(4)->Unit(benchmark::kSecond)->Iterations(1)->UseRealTime();
BENCHMARK(BM_FillParallel)->Arg(4)->Unit(benchmark::kSecond)->Iterations(1)->UseRealTime();
BENCHMARK_MAIN();
