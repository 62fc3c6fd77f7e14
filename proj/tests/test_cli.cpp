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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "qsense/commands.hpp"
#include "qsense/config.hpp"
#include "qsense/errors.hpp"
#include "qsense/io.hpp"
#include "qsense/table_io.hpp"
#include "qsense/units.hpp"

using namespace qsense;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("qsense-cli-" + std::to_string(std::rand()) + "-" +
                                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

json base_config() {
  return {{"transmon", {{"e_j_ghz", 12.508606}, {"e_c_ghz", 0.244181}}},
          {"ramsey", {{"gate_offset1_mhz", 2.0}, {"gate_offset2_mhz", 2.0}, {"n_avg", 3000}}},
          {"seed", 5}};
}

std::string write_config(const TempDir& dir, const json& j, const std::string& name = "run.json") {
  const std::string p = dir / name;
  io::write_atomic(p, j.dump(2));
  return p;
}

int run_cli(const std::string& args) {
  const char* exe = std::getenv("QSENSE_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "QSENSE_CLI must point at the qsense binary");
  const char* log = std::getenv("QSENSE_CLI_LOG");
  const std::string sink = log ? std::string(" >>") + log + " 2>&1" : " >/dev/null 2>&1";
  const int status = std::system((std::string(exe) + " " + args + sink).c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) { return io::read_text(path); }

// A filled table whose values are placeholders; only its pipeline matters.
void write_fake_table(const std::string& path, const config::RunConfig& cfg, int cols = 2) {
  lookup::GridSpec spec{units::ghz_to_rad_ns(0.05), units::ghz_to_rad_ns(0.1), 2,
                        units::ghz_to_rad_ns(5.2), units::ghz_to_rad_ns(5.4), cols};
  auto g = lookup::LookupGrid::empty(spec, cfg.pipeline());
  g.delta1.setConstant(units::mhz_to_rad_ns(3.0));
  g.delta2.setConstant(units::mhz_to_rad_ns(1.0));
  g.delta1(1, 0) = units::mhz_to_rad_ns(4.0);
  g.status.setConstant(static_cast<int>(lookup::EntryStatus::Done));
  lookup::write_table(path, g);
}

}  // namespace

TEST_CASE("config schema errors name the offending field") {
  json j = base_config();
  j["ramsey"]["n_step"] = 80;
  try {
    config::parse_config(j);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("ramsey.n_step") != std::string::npos);
  }
  j = base_config();
  j["ramsey"]["n_steps"] = 4;
  CHECK_THROWS_AS(config::parse_config(j), ValidationError);
  j = base_config();
  j["field"] = {{"freq_ghz", 5.3}};
  CHECK_THROWS_AS(config::parse_config(j), ValidationError);
  j = {{"transmon", {{"omega1_ghz", 4.685}}}};
  try {
    config::parse_config(j);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("transmon.omega2_ghz") != std::string::npos);
  }
}

TEST_CASE("dBm input and transfer functions") {
  json j = base_config();
  j["field"] = {{"freq_ghz", 5.3}, {"power_dbm", 0.0}, {"amp_per_sqrt_mw_ghz", 0.2}};
  j["sweep"] = {{"freq_start_ghz", 5.1},
                {"freq_stop_ghz", 5.5},
                {"points", 5},
                {"transfer", {{"kind", "lorentzian"}, {"center_ghz", 5.3}, {"width_mhz", 100.0}, {"peak", 1.0}}}};
  const auto c = config::parse_config(j);
  CHECK(c.field->source_amp_ghz() == doctest::Approx(0.2));
  CHECK(c.sweep->transfer.gain(5.3) == doctest::Approx(1.0));
  CHECK(c.sweep->transfer.gain(5.35) == doctest::Approx(0.5));
  j["field"]["power_dbm"] = 20.0;
  CHECK(config::parse_config(j).field->source_amp_ghz() == doctest::Approx(2.0));
}

TEST_CASE("exit codes") {
  TempDir dir;
  json bad = base_config();
  bad["typo"] = 1;
  CHECK(run_cli("limits -c " + write_config(dir, bad)) == cli::kExitValidation);
  json equal = {{"transmon", {{"omega1_ghz", 4.6}, {"omega2_ghz", 4.6}}}};
  CHECK(run_cli("calibrate -c " + write_config(dir, equal)) == cli::kExitValidation);
  CHECK(run_cli("limits -c " + dir / "missing.json") == cli::kExitValidation);
  CHECK(run_cli("limits --bogus") == cli::kExitValidation);
  CHECK(run_cli("limits -c " + write_config(dir, base_config())) == cli::kExitOk);
  CHECK(cli::exit_code_for(OutOfRangeError("x")) == cli::kExitOutOfRange);
  CHECK(cli::exit_code_for(NoOscillationError("x")) == cli::kExitNumeric);
  CHECK(cli::exit_code_for(std::runtime_error("x")) == 1);
}

TEST_CASE("calibrate writes parameters that reproduce the targets") {
  TempDir dir;
  json j = {{"transmon", {{"omega1_ghz", 4.685}, {"omega2_ghz", 4.405}}}};
  REQUIRE(run_cli("calibrate -c " + write_config(dir, j) + " -o " + dir / "t.json") == 0);
  const json out = json::parse(slurp(dir / "t.json"));
  CHECK(out["format_version"] == 1);
  CHECK(std::abs(out["transitions_ghz"][0].get<double>() - 4.685) < 1e-6);
  CHECK(std::abs(out["transitions_ghz"][1].get<double>() - 4.405) < 1e-6);
}

TEST_CASE("output directory comes from the environment") {
  cli::Context ctx;
  ::setenv("QSENSE_OUT_DIR", "/tmp/somewhere", 1);
  CHECK(ctx.output_path("a.csv") == "/tmp/somewhere/a.csv");
  ::unsetenv("QSENSE_OUT_DIR");
  ctx.out = "x.csv";
  CHECK(ctx.output_path("a.csv") == "x.csv");
}

TEST_CASE("synth-trace output is byte-identical for a fixed seed") {
  TempDir dir;
  json j = base_config();
  j["field"] = {{"freq_ghz", 5.3}, {"amp_ghz", 0.08}};
  j["ramsey"]["n_steps"] = 20;
  const std::string cfg = write_config(dir, j);
  REQUIRE(run_cli("synth-trace -c " + cfg + " -o " + dir / "a.csv") == 0);
  REQUIRE(run_cli("synth-trace -c " + cfg + " -o " + dir / "b.csv") == 0);
  REQUIRE(run_cli("synth-trace -c " + cfg + " --seed 6 -o " + dir / "c.csv") == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(slurp(dir / "a.csv") != slurp(dir / "c.csv"));
  CHECK(slurp(dir / "a.csv").rfind("delay_ns,population\n", 0) == 0);
  CHECK(json::parse(slurp(dir / "a.csv.json"))["format_version"] == 1);
}

TEST_CASE("gen-table resumes a partial file and matches a fresh run") {
  TempDir dir;
  json j = base_config();
  j["grid"] = {{"amp_min_ghz", 0.06}, {"amp_max_ghz", 0.09}, {"amp_count", 2},
               {"freq_min_ghz", 5.3}, {"freq_max_ghz", 5.3}, {"freq_count", 1}};
  const std::string cfg = write_config(dir, j);
  REQUIRE(run_cli("gen-table -c " + cfg + " -o " + dir / "full.qst") == 0);
  auto g = lookup::read_table(dir / "full.qst");
  CHECK(g.rows() == 2);
  CHECK(g.cols() == 1);
  CHECK(g.complete());
  g.status(1, 0) = static_cast<int>(lookup::EntryStatus::Pending);
  g.delta1(1, 0) = g.delta2(1, 0) = NAN;
  lookup::write_table(dir / "part.qst", g);
  REQUIRE(run_cli("gen-table -c " + cfg + " -o " + dir / "part.qst") == 0);
  CHECK(slurp(dir / "part.qst") == slurp(dir / "full.qst"));

  json other = j;
  other["ramsey"]["gate_amp_mhz"] = 25.0;
  CHECK(run_cli("gen-table -c " + write_config(dir, other, "other.json") + " -o " + dir / "full.qst") ==
        cli::kExitValidation);
}

TEST_CASE("single-cell table: sense returns that cell") {
  TempDir dir;
  json j = base_config();
  j["grid"] = {{"amp_min_ghz", 0.097}, {"amp_max_ghz", 0.097}, {"amp_count", 1},
               {"freq_min_ghz", 5.297}, {"freq_max_ghz", 5.297}, {"freq_count", 1}};
  REQUIRE(run_cli("gen-table -c " + write_config(dir, j) + " -o " + dir / "one.qst") == 0);
  j["sense"] = {{"table", dir / "one.qst"}};
  j["field"] = {{"freq_ghz", 5.297}, {"amp_ghz", 0.097}};
  REQUIRE(run_cli("sense -c " + write_config(dir, j) + " -o " + dir / "sense.json") == 0);
  const json out = json::parse(slurp(dir / "sense.json"));
  CHECK(out["result"]["freq_ghz"].get<double>() == doctest::Approx(5.297));
  CHECK(out["result"]["amp_ghz"].get<double>() == doctest::Approx(0.097));
  CHECK(out.contains("fit1"));
  CHECK(out.contains("delta2"));
}

TEST_CASE("table hash mismatch fails before any numerics") {
  TempDir dir;
  const auto cfg = config::parse_config(base_config());
  write_fake_table(dir / "t.qst", cfg);
  json j = base_config();
  j["ramsey"]["gate_offset2_mhz"] = 3.0;
  j["sense"] = {{"table", dir / "t.qst"}};
  j["field"] = {{"freq_ghz", 5.3}, {"amp_ghz", 0.08}};
  const auto changed = config::parse_config(j);
  const auto table = lookup::read_table(dir / "t.qst");
  CHECK_THROWS_AS(cli::run_sense(changed, table, 1), ValidationError);
  CHECK(run_cli("sense -c " + write_config(dir, j)) == cli::kExitValidation);
}

TEST_CASE("shifts outside the sensor window exit with the out-of-range code") {
  TempDir dir;
  json j = base_config();
  j["ramsey"]["gate_offset2_mhz"] = 0.0;  // the pipeline Delta_2 near 0.97 MHz is below 1.25 MHz
  j["ramsey"]["n_avg"] = 100000;
  const auto cfg = config::parse_config(j);
  write_fake_table(dir / "t.qst", cfg);
  j["sense"] = {{"table", dir / "t.qst"}};
  j["field"] = {{"freq_ghz", 5.297}, {"amp_ghz", 0.097}};
  CHECK(run_cli("sense -c " + write_config(dir, j) + " -o " + dir / "s.json") == cli::kExitOutOfRange);
}

TEST_CASE("sweep records per-point failures and continues") {
  TempDir dir;
  json j = base_config();
  const auto cfg = config::parse_config(j);
  write_fake_table(dir / "t.qst", cfg);
  j["sense"] = {{"table", dir / "t.qst"}};
  j["field"] = {{"freq_ghz", 5.3}, {"amp_ghz", 0.08}};
  j["sweep"] = {{"freq_start_ghz", 5.2}, {"freq_stop_ghz", 5.4}, {"points", 2}};
  REQUIRE(run_cli("sweep -c " + write_config(dir, j) + " -o " + dir / "sweep.csv") == 0);
  std::istringstream csv(slurp(dir / "sweep.csv"));
  std::string header, line;
  std::getline(csv, header);
  CHECK(header.find("discrepancy_mhz") != std::string::npos);
  CHECK(header.find("error") != std::string::npos);
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 2);
  const json summary = json::parse(slurp(dir / "sweep.csv.json"));
  CHECK(summary["points"] == 2);
  CHECK(summary["wall_time_per_point_s"].get<double>() == doctest::Approx(2 * 80 * 3000 * 240e-6));
}

TEST_CASE("phase-scan writes plot-ready CSV") {
  TempDir dir;
  json j = base_config();
  j["phase_scan"] = {{"omega_a_mhz", 30.0}, {"detuning_max_mhz", 20.0}, {"points", 5}};
  REQUIRE(run_cli("phase-scan -c " + write_config(dir, j) + " -o " + dir / "p.csv") == 0);
  const std::string text = slurp(dir / "p.csv");
  CHECK(text.rfind("detuning_mhz,phi_rad,p1\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 6);
}
