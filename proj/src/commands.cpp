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

#include "qsense/commands.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <omp.h>

#include "qsense/analysis.hpp"
#include "qsense/errors.hpp"
#include "qsense/io.hpp"
#include "qsense/table_io.hpp"
#include "qsense/units.hpp"

namespace qsense::cli {

namespace {

std::ostream& report(const Context& ctx) { return ctx.report ? *ctx.report : std::cout; }
std::ostream& log(const Context& ctx) { return ctx.log ? *ctx.log : std::cerr; }

dynamics::QuditOperators operators_for(const transmon::TransmonParams& p) {
  return dynamics::QuditOperators::from(transmon::diagonalize(p));
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n') c = ';';
  }
  return s;
}

nlohmann::json limits_json(const lookup::SensorLimits& lim) {
  return {{"delta1_max_mhz", units::rad_ns_to_mhz(lim.delta1_max)},
          {"delta2_min_mhz", units::rad_ns_to_mhz(lim.delta2_min)},
          {"n_r", lim.n_r},
          {"delta_t_max_ns", lim.delta_t_max}};
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out;
  for (int k = 0; k < n; ++k) out.push_back(n == 1 ? lo : lo + (hi - lo) * k / (n - 1.0));
  return out;
}

}  // namespace

std::string Context::output_path(const std::string& name) const {
  if (!out.empty()) return out;
  const char* dir = std::getenv("QSENSE_OUT_DIR");
  return (std::filesystem::path(dir && *dir ? dir : ".") / name).string();
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
  if (dynamic_cast<const OutOfRangeError*>(&e)) return kExitOutOfRange;
  if (dynamic_cast<const NumericError*>(&e)) return kExitNumeric;
  return 1;
}

double wall_time_estimate(const config::RunConfig& config) {
  return 2.0 * config.ramsey.n_steps * static_cast<double>(config.n_avg) * config.t_rep_us * 1e-6;
}

nlohmann::json SenseReport::to_json() const {
  nlohmann::json j;
  j["fit1"] = io::fit_to_json(shifts.fit1);
  j["fit2"] = io::fit_to_json(shifts.fit2);
  j["delta1"] = io::shift_to_json(shifts.first);
  j["delta2"] = io::shift_to_json(shifts.second);
  j["result"] = io::sense_to_json(result);
  j["limits"] = limits_json(limits);
  if (applied_amp_ghz) j["applied_amp_ghz"] = *applied_amp_ghz;
  if (applied_freq_ghz) {
    j["applied_freq_ghz"] = *applied_freq_ghz;
    j["discrepancy_mhz"] = std::abs(units::rad_ns_to_ghz(result.freq) - *applied_freq_ghz) * 1e3;
  }
  return j;
}

namespace {

// Shifts from recorded traces or from simulating the configured field.
lookup::MeasuredShifts acquire_shifts(const config::RunConfig& config,
                                      const lookup::PipelineConfig& pipeline,
                                      const dynamics::QuditOperators& ops, std::uint64_t seed,
                                      SenseReport& rep) {
  if (!config.sense.trace1.empty()) {
    const RamseyTrace t1 = io::parse_trace_csv(io::read_text(config.sense.trace1));
    const RamseyTrace t2 = io::parse_trace_csv(io::read_text(config.sense.trace2));
    return lookup::shifts_from_traces(t1, t2, ops, pipeline.ramsey);
  }
  if (config.field) {
    const double amp = config.field->source_amp_ghz();
    rep.applied_amp_ghz = amp;
    rep.applied_freq_ghz = config.field->freq_ghz;
    const dynamics::DriveTone tone{units::ghz_to_rad_ns(amp),
                                   units::ghz_to_rad_ns(config.field->freq_ghz), 0.0};
    lookup::MeasureOptions opts;
    opts.n_avg = config.n_avg;
    opts.seed = seed;
    return lookup::measure_shifts(ops, tone, pipeline.ramsey, opts);
  }
  throw ValidationError("sense: give sense.trace1/sense.trace2 or a field block");
}

}  // namespace

SenseReport run_sense(const config::RunConfig& config, const lookup::LookupGrid& grid,
                      std::uint64_t seed) {
  const lookup::PipelineConfig pipeline = config.pipeline();
  lookup::check_pipeline(grid, pipeline);
  const dynamics::QuditOperators ops = operators_for(pipeline.transmon);

  SenseReport rep;
  rep.limits = pipeline.sensor_limits();
  try {
    rep.shifts = acquire_shifts(config, pipeline, ops, seed, rep);
  } catch (const NoOscillationError& e) {
    // Fewer than the minimum fringe periods means a shift below delta2_min.
    throw OutOfRangeError(std::string(e.what()) + "; the sensor window is " +
                          io::format_number(units::rad_ns_to_mhz(rep.limits.delta2_min)) +
                          " MHz <= shift <= " +
                          io::format_number(units::rad_ns_to_mhz(rep.limits.delta1_max)) + " MHz");
  }

  lookup::InvertOptions inv;
  inv.weighted = config.sense.weighted;
  inv.interpolate = config.sense.interpolate;
  rep.result = lookup::invert(rep.shifts.first, rep.shifts.second, grid, inv);
  const lookup::Uncertainty u =
      lookup::propagate_uncertainty(rep.shifts.first, rep.shifts.second, grid, inv);
  rep.result.amp_err = u.amp_err;
  rep.result.freq_err = u.freq_err;
  rep.result.clamped = rep.result.clamped || u.clamped;
  return rep;
}

double SweepPoint::discrepancy_mhz() const {
  return ok ? std::abs(units::rad_ns_to_ghz(result.freq) - freq_apl_ghz) * 1e3 : NAN;
}

SweepResult run_sweep(const config::RunConfig& config, const lookup::LookupGrid& grid,
                      std::uint64_t seed, int jobs) {
  if (!config.sweep) throw ValidationError("sweep: required block is missing");
  if (!config.field) {
    throw ValidationError("sweep: the field block must give the source amp_ghz or power_dbm");
  }
  const lookup::PipelineConfig pipeline = config.pipeline();
  lookup::check_pipeline(grid, pipeline);
  const dynamics::QuditOperators ops = operators_for(pipeline.transmon);
  const config::SweepSpec& sweep = *config.sweep;
  const double source = config.field->source_amp_ghz();

  SweepResult out;
  out.wall_time_per_point_s = wall_time_estimate(config);
  const auto freqs = linspace(sweep.freq_start_ghz, sweep.freq_stop_ghz, sweep.points);
  out.points.resize(freqs.size());
  const int threads = jobs > 0 ? jobs : omp_get_max_threads();
  const auto n = static_cast<long>(freqs.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long k = 0; k < n; ++k) {
    SweepPoint& p = out.points[static_cast<size_t>(k)];
    p.freq_apl_ghz = freqs[static_cast<size_t>(k)];
    p.gain = sweep.transfer.gain(p.freq_apl_ghz);
    p.amp_apl_ghz = source * p.gain;
    try {
      const dynamics::DriveTone tone{units::ghz_to_rad_ns(p.amp_apl_ghz),
                                     units::ghz_to_rad_ns(p.freq_apl_ghz), 0.0};
      lookup::MeasureOptions opts;
      opts.n_avg = config.n_avg;
      opts.seed = dynamics::mix_seed(seed, static_cast<std::uint64_t>(k));
      const lookup::MeasuredShifts m = lookup::measure_shifts(ops, tone, pipeline.ramsey, opts);
      p.delta1_mhz = units::rad_ns_to_mhz(m.first.delta);
      p.delta2_mhz = units::rad_ns_to_mhz(m.second.delta);
      p.sigma1_khz = units::rad_ns_to_khz(m.first.sigma);
      p.sigma2_khz = units::rad_ns_to_khz(m.second.sigma);
      lookup::InvertOptions inv;
      inv.weighted = config.sense.weighted;
      inv.interpolate = config.sense.interpolate;
      p.result = lookup::invert(m.first, m.second, grid, inv);
      const lookup::Uncertainty u = lookup::propagate_uncertainty(m.first, m.second, grid, inv);
      p.result.amp_err = u.amp_err;
      p.result.freq_err = u.freq_err;
      p.result.clamped = p.result.clamped || u.clamped;
      p.ok = true;
    } catch (const std::exception& e) {
      p.ok = false;
      p.error = e.what();
    }
  }
  return out;
}

std::string SweepResult::to_csv() const {
  io::CsvWriter csv({"freq_apl_ghz", "amp_apl_ghz", "gain", "ok", "freq_ex_ghz", "amp_ex_ghz",
                     "freq_err_ghz", "amp_err_ghz", "discrepancy_mhz", "delta1_mhz", "delta2_mhz",
                     "sigma1_khz", "sigma2_khz", "power_dbm", "ambiguous", "error"});
  for (const SweepPoint& p : points) {
    auto num = [](double x) { return io::format_number(x); };
    const double nan = NAN;
    csv.add_row(std::vector<std::string>{
        num(p.freq_apl_ghz), num(p.amp_apl_ghz), num(p.gain), p.ok ? "1" : "0",
        num(p.ok ? units::rad_ns_to_ghz(p.result.freq) : nan),
        num(p.ok ? units::rad_ns_to_ghz(p.result.amp) : nan),
        num(p.ok ? units::rad_ns_to_ghz(p.result.freq_err) : nan),
        num(p.ok ? units::rad_ns_to_ghz(p.result.amp_err) : nan), num(p.discrepancy_mhz()),
        num(p.delta1_mhz), num(p.delta2_mhz), num(p.sigma1_khz), num(p.sigma2_khz),
        num(p.ok ? p.result.power_dbm : nan), p.result.ambiguous ? "1" : "0", sanitize(p.error)});
  }
  return csv.str();
}

nlohmann::json SweepResult::summary() const {
  int ok = 0;
  double rel_amp_err = 0.0;
  double rel_freq_err = 0.0;
  double rel_amp_dev = 0.0;
  double discrepancy = 0.0;
  for (const SweepPoint& p : points) {
    if (!p.ok || !(p.result.amp > 0.0)) continue;
    ++ok;
    rel_amp_err += p.result.amp_err / p.result.amp;
    rel_freq_err += p.result.freq_err / p.result.freq;
    rel_amp_dev += std::abs(units::rad_ns_to_ghz(p.result.amp) - p.amp_apl_ghz) / p.amp_apl_ghz;
    discrepancy += p.discrepancy_mhz();
  }
  nlohmann::json j = {{"points", points.size()}, {"succeeded", ok},
                      {"wall_time_per_point_s", wall_time_per_point_s},
                      {"wall_time_total_s", wall_time_per_point_s * static_cast<double>(points.size())}};
  if (ok > 0) {
    j["mean_rel_amp_err"] = rel_amp_err / ok;
    j["mean_rel_freq_err"] = rel_freq_err / ok;
    j["mean_rel_amp_deviation"] = rel_amp_dev / ok;
    j["mean_discrepancy_mhz"] = discrepancy / ok;
  }
  return j;
}

int cmd_calibrate(const config::RunConfig& config, const Context& ctx) {
  if (!config.targets_ghz && !config.transmon) {
    throw ValidationError("transmon.omega1_ghz: required field is missing");
  }
  const transmon::TransmonParams p = config.resolve_transmon();
  const transmon::Diagonalization d = transmon::diagonalize(p);
  nlohmann::json params;
  transmon::to_json(params, p);
  const nlohmann::json j = {{"format_version", 1},
                            {"transmon", params},
                            {"transitions_ghz", d.spectrum.transitions},
                            {"anharmonicity_ghz", d.spectrum.anharmonicity}};
  const std::string path = ctx.output_path("transmon.json");
  io::write_atomic(path, j.dump(2) + "\n");
  report(ctx) << "E_J = " << p.e_j << " GHz, E_C = " << p.e_c << " GHz (E_J/E_C = " << p.e_j / p.e_c
              << ")\nomega1 = " << d.spectrum.transitions[0]
              << " GHz, omega2 = " << d.spectrum.transitions[1] << " GHz\nwrote " << path << "\n";
  return kExitOk;
}

int cmd_gen_table(const config::RunConfig& config, const Context& ctx) {
  const lookup::PipelineConfig pipeline = config.pipeline();
  const std::string path = ctx.output_path("table.qst");
  lookup::GenerateOptions opts;
  opts.jobs = ctx.jobs;
  opts.on_row = [&](const lookup::LookupGrid& g, int row) {
    lookup::write_table(path, g);
    log(ctx) << "row " << row + 1 << "/" << g.rows() << " done\n";
  };

  std::optional<lookup::LookupGrid> grid;
  if (std::filesystem::exists(path)) {
    lookup::LookupGrid existing = lookup::read_table(path);
    const lookup::LookupGrid fresh = lookup::LookupGrid::empty(config.grid, pipeline);
    lookup::check_pipeline(existing, pipeline);
    if (existing.amp_axis != fresh.amp_axis || existing.freq_axis != fresh.freq_axis) {
      // Axes are compared after a GHz round trip; allow for the last bit.
      bool same = existing.amp_axis.size() == fresh.amp_axis.size() &&
                  existing.freq_axis.size() == fresh.freq_axis.size();
      for (size_t k = 0; same && k < fresh.amp_axis.size(); ++k) {
        same = std::abs(existing.amp_axis[k] - fresh.amp_axis[k]) <= 1e-12 * (1 + fresh.amp_axis[k]);
      }
      for (size_t k = 0; same && k < fresh.freq_axis.size(); ++k) {
        same = std::abs(existing.freq_axis[k] - fresh.freq_axis[k]) <= 1e-12 * fresh.freq_axis[k];
      }
      if (!same) throw ValidationError("gen-table: " + path + " holds a table with different axes");
    }
    log(ctx) << "resuming " << path << "\n";
    grid = std::move(existing);
    lookup::fill(*grid, opts);
  } else {
    grid = lookup::generate(config.grid, pipeline, opts);
  }
  lookup::write_table(path, *grid);
  report(ctx) << "table " << grid->rows() << "x" << grid->cols() << ", holes "
              << grid->hole_fraction() * 100.0 << " %, hash "
              << lookup::hash_hex(lookup::pipeline_hash(pipeline)) << "\nwrote " << path << "\n";
  return kExitOk;
}

int cmd_sense(const config::RunConfig& config, const Context& ctx) {
  if (config.sense.table.empty()) throw ValidationError("sense.table: required field is missing");
  const lookup::LookupGrid grid = lookup::read_table(config.sense.table);
  const SenseReport rep = run_sense(config, grid, ctx.effective_seed(config));
  const std::string path = ctx.output_path("sense.json");
  io::write_atomic(path, rep.to_json().dump(2) + "\n");
  const auto& r = rep.result;
  report(ctx) << "delta1 = " << units::rad_ns_to_mhz(rep.shifts.first.delta) << " MHz +- "
              << units::rad_ns_to_khz(rep.shifts.first.sigma) << " kHz\n"
              << "delta2 = " << units::rad_ns_to_mhz(rep.shifts.second.delta) << " MHz +- "
              << units::rad_ns_to_khz(rep.shifts.second.sigma) << " kHz\n"
              << "field: A/2pi = " << units::rad_ns_to_ghz(r.amp) << " +- "
              << units::rad_ns_to_ghz(r.amp_err) << " GHz, w/2pi = " << units::rad_ns_to_ghz(r.freq)
              << " +- " << units::rad_ns_to_ghz(r.freq_err) << " GHz, P = " << r.power_dbm
              << " dBm" << (r.ambiguous ? " (ambiguous)" : "") << "\nwrote " << path << "\n";
  return kExitOk;
}

int cmd_sweep(const config::RunConfig& config, const Context& ctx) {
  if (config.sense.table.empty()) throw ValidationError("sense.table: required field is missing");
  const lookup::LookupGrid grid = lookup::read_table(config.sense.table);
  const SweepResult res = run_sweep(config, grid, ctx.effective_seed(config), ctx.jobs);
  const std::string path = ctx.output_path("sweep.csv");
  io::write_atomic(path, res.to_csv());
  io::write_atomic(path + ".json", res.summary().dump(2) + "\n");
  report(ctx) << res.summary().dump(2) << "\nwrote " << path << "\n";
  return kExitOk;
}

int cmd_limits(const config::RunConfig& config, const Context& ctx) {
  const lookup::SensorLimits lim = lookup::limits(config.ramsey.n_steps, config.ramsey.delta_t_max);
  nlohmann::json j = limits_json(lim);
  j["gate_offset1_mhz"] = units::rad_ns_to_mhz(config.ramsey.gate_offset1);
  j["gate_offset2_mhz"] = units::rad_ns_to_mhz(config.ramsey.gate_offset2);
  j["wall_time_s"] = wall_time_estimate(config);
  report(ctx) << j.dump(2) << "\n";
  if (!ctx.out.empty()) io::write_atomic(ctx.out, j.dump(2) + "\n");
  return kExitOk;
}

int cmd_phase_scan(const config::RunConfig& config, const Context& ctx) {
  const config::PhaseScanSpec& s = config.phase_scan;
  const double omega_a = units::mhz_to_rad_ns(s.omega_a_mhz);
  const auto det_mhz = linspace(-s.detuning_max_mhz, s.detuning_max_mhz, s.points);
  std::vector<double> det;
  for (double d : det_mhz) det.push_back(units::mhz_to_rad_ns(d));
  auto phi = [&](double d) {
    return s.phase_offset_rad + s.phase_slope_rad_per_mhz * units::rad_ns_to_mhz(d);
  };
  const std::vector<double> p1 = analysis::phase_scan(omega_a, det, phi);
  io::CsvWriter csv({"detuning_mhz", "phi_rad", "p1"});
  for (size_t k = 0; k < det.size(); ++k) csv.add_row({det_mhz[k], phi(det[k]), p1[k]});
  const std::string path = ctx.output_path("phase_scan.csv");
  io::write_atomic(path, csv.str());
  report(ctx) << "phase scan with " << det.size() << " points\nwrote " << path << "\n";
  return kExitOk;
}

int cmd_synth_trace(const config::RunConfig& config, const Context& ctx) {
  const lookup::PipelineConfig pipeline = config.pipeline();
  const dynamics::QuditOperators ops = operators_for(pipeline.transmon);
  std::optional<dynamics::DriveTone> tone;
  nlohmann::json meta = {{"format_version", 1},
                         {"transition", config.synth.transition},
                         {"pipeline", lookup::pipeline_to_json(pipeline)}};
  if (config.field) {
    tone = dynamics::DriveTone{units::ghz_to_rad_ns(config.field->source_amp_ghz()),
                               units::ghz_to_rad_ns(config.field->freq_ghz), 0.0};
    meta["field"] = {{"amp_ghz", config.field->source_amp_ghz()},
                     {"freq_ghz", config.field->freq_ghz}};
  }
  std::optional<double> hint;
  if (config.synth.transition == 2) {
    if (!config.synth.shift_hint_mhz) {
      throw ValidationError("synth.shift_hint_mhz: required for the second transition");
    }
    hint = units::mhz_to_rad_ns(*config.synth.shift_hint_mhz);
    meta["shift_hint_mhz"] = *config.synth.shift_hint_mhz;
  }
  RamseyTrace trace = dynamics::ramsey_trace(ops, config.synth.transition, tone, pipeline.ramsey, hint);
  if (config.synth.noisy) {
    const std::uint64_t seed = ctx.effective_seed(config);
    trace = dynamics::add_measurement_noise(
        trace, config.n_avg, dynamics::mix_seed(seed, static_cast<std::uint64_t>(config.synth.transition)));
    meta["n_avg"] = config.n_avg;
    meta["seed"] = seed;
  }
  meta["gate_freq_ghz"] = units::rad_ns_to_ghz(pipeline.ramsey.gate_freq(ops, config.synth.transition));
  const std::string path = ctx.output_path("trace" + std::to_string(config.synth.transition) + ".csv");
  io::write_atomic(path, io::format_trace_csv(trace));
  io::write_atomic(path + ".json", meta.dump(2) + "\n");
  report(ctx) << "wrote " << path << " (" << trace.size() << " points)\n";
  return kExitOk;
}

}  // namespace qsense::cli
