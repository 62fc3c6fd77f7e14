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

// Command-line front end: qsense <subcommand> --config run.json [options]

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qsense/commands.hpp"
#include "qsense/config.hpp"
#include "qsense/errors.hpp"

int main(int argc, char** argv) {
  using namespace qsense;
  CLI::App app{"qsense: transmon-based microwave field sensing"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  cli::Context ctx;
  ctx.report = &std::cout;
  ctx.log = &std::cerr;

  struct Entry {
    const char* name;
    const char* help;
    int (*run)(const config::RunConfig&, const cli::Context&);
  };
  const Entry entries[] = {
      {"calibrate", "Fit E_J and E_C to the measured transitions", cli::cmd_calibrate},
      {"gen-table", "Generate or resume the lookup table", cli::cmd_gen_table},
      {"sense", "Invert one pair of shifts to the field amplitude and frequency", cli::cmd_sense},
      {"sweep", "Sense a frequency sweep through a transfer function", cli::cmd_sweep},
      {"limits", "Print the sensor window and acquisition time", cli::cmd_limits},
      {"phase-scan", "Phase-scheme population versus detuning", cli::cmd_phase_scan},
      {"synth-trace", "Write a simulated Ramsey trace", cli::cmd_synth_trace},
  };
  struct Bound {
    CLI::App* app;
    CLI::Option* seed;
    const Entry* entry;
  };
  std::vector<Bound> subs;
  for (const Entry& e : entries) {
    CLI::App* sub = app.add_subcommand(e.name, e.help);
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
    auto* opt = sub->add_option("--seed", seed, "RNG seed (overrides the config)");
    sub->add_option("-o,--out", ctx.out, "Output path");
    sub->add_option("-j,--jobs", ctx.jobs, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    subs.push_back({sub, opt, &e});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitValidation;
  }

  try {
    for (const Bound& b : subs) {
      if (!b.app->parsed()) continue;
      if (b.seed->count() > 0) ctx.seed = seed;
      const config::RunConfig config = config::load_config(config_path);
      return b.entry->run(config, ctx);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return cli::exit_code_for(e);
  }
  return 1;
}
