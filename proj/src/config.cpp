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

#include "qsense/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qsense/errors.hpp"
#include "qsense/io.hpp"
#include "qsense/units.hpp"

namespace qsense::config {

namespace {

using nlohmann::json;

// Reads one JSON object, tracking which keys were consumed so that any
// leftover (misspelled) key can be reported with its full path.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ValidationError(where() + ": expected an object");
  }

  bool has(const std::string& key) {
    known_.insert(key);
    return j_.contains(key);
  }

  std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& raw(const std::string& key) {
    known_.insert(key);
    if (!j_.contains(key)) throw ValidationError(child(key) + ": required field is missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ValidationError(child(key) + ": expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ValidationError(child(key) + ": must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) {
    const double x = number(key);
    if (!(x > 0.0)) throw ValidationError(child(key) + ": must be positive");
    return x;
  }
  double positive(const std::string& key, double fallback) {
    return has(key) ? positive(key) : fallback;
  }
  double non_negative(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    const double x = number(key);
    if (x < 0.0) throw ValidationError(child(key) + ": must be >= 0");
    return x;
  }

  long integer(const std::string& key, long fallback, long min_value) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_number_integer()) throw ValidationError(child(key) + ": expected an integer");
    const long x = v.get<long>();
    if (x < min_value) {
      throw ValidationError(child(key) + ": must be at least " + std::to_string(min_value));
    }
    return x;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_boolean()) throw ValidationError(child(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    if (!has(key)) return fallback;
    const json& v = raw(key);
    if (!v.is_string()) throw ValidationError(child(key) + ": expected a string");
    return v.get<std::string>();
  }

  Reader object(const std::string& key) { return Reader(raw(key), child(key)); }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!known_.count(k)) throw ValidationError(child(k) + ": unknown key");
    }
  }

  std::string where() const { return path_.empty() ? "config" : path_; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> known_;
};

std::vector<double> decay_list(Reader& r, const std::string& key) {
  std::vector<double> out;
  if (!r.has(key)) return out;
  const json& arr = r.raw(key);
  if (!arr.is_array()) throw ValidationError(r.child(key) + ": expected an array");
  for (size_t i = 0; i < arr.size(); ++i) {
    const auto& e = arr[i];
    const std::string at = r.child(key) + "[" + std::to_string(i) + "]";
    if (e.is_null()) {
      out.push_back(INFINITY);
    } else if (e.is_number() && e.get<double>() > 0.0) {
      out.push_back(e.get<double>());
    } else {
      throw ValidationError(at + ": expected a positive number or null");
    }
  }
  return out;
}

void parse_transmon(Reader r, RunConfig& c) {
  c.n_g = r.number("n_g", 0.0);
  c.charge_cutoff = static_cast<int>(r.integer("charge_cutoff", 30, 3));
  c.d_keep = static_cast<int>(r.integer("d_keep", 7, 3));
  const bool has_params = r.has("e_j_ghz") || r.has("e_c_ghz");
  const bool has_targets = r.has("omega1_ghz") || r.has("omega2_ghz");
  if (has_params && has_targets) {
    throw ValidationError(r.where() + ": give either e_j_ghz/e_c_ghz or omega1_ghz/omega2_ghz");
  }
  if (has_params) {
    transmon::TransmonParams p;
    p.e_j = r.positive("e_j_ghz");
    p.e_c = r.positive("e_c_ghz");
    p.n_g = c.n_g;
    p.charge_cutoff = c.charge_cutoff;
    p.d_keep = c.d_keep;
    p.validate();
    c.transmon = p;
  } else {
    c.targets_ghz = std::make_pair(r.positive("omega1_ghz"), r.positive("omega2_ghz"));
  }
  r.finish();
}

void parse_ramsey(Reader r, RunConfig& c) {
  auto& m = c.ramsey;
  m.delta_t_max = r.positive("delta_t_max_ns", 800.0);
  m.n_steps = static_cast<int>(r.integer("n_steps", 80, 8));
  m.gate_amp = units::mhz_to_rad_ns(r.positive("gate_amp_mhz", 30.0));
  m.gate_offset1 = units::mhz_to_rad_ns(r.number("gate_offset1_mhz", 0.0));
  m.gate_offset2 = units::mhz_to_rad_ns(r.number("gate_offset2_mhz", 0.0));
  m.counter_rotating = r.boolean("counter_rotating", false);
  m.step_safety = r.positive("step_safety", 0.1);
  c.n_avg = r.integer("n_avg", 3000, 1);
  c.t_rep_us = r.positive("t_rep_us", 240.0);
  if (r.has("dissipation")) {
    Reader d = r.object("dissipation");
    dynamics::DissipationSpec spec;
    spec.relaxation = decay_list(d, "t1_ns");
    spec.dephasing = decay_list(d, "t_phi_ns");
    d.finish();
    m.dissipation = spec;
  }
  r.finish();
}

void parse_grid(Reader r, RunConfig& c) {
  const lookup::GridSpec def = default_grid();
  lookup::GridSpec& g = c.grid;
  g.amp_min = units::ghz_to_rad_ns(r.non_negative("amp_min_ghz", units::rad_ns_to_ghz(def.amp_min)));
  g.amp_max = units::ghz_to_rad_ns(r.non_negative("amp_max_ghz", units::rad_ns_to_ghz(def.amp_max)));
  g.amp_count = static_cast<int>(r.integer("amp_count", def.amp_count, 1));
  g.freq_min = units::ghz_to_rad_ns(r.positive("freq_min_ghz", units::rad_ns_to_ghz(def.freq_min)));
  g.freq_max = units::ghz_to_rad_ns(r.positive("freq_max_ghz", units::rad_ns_to_ghz(def.freq_max)));
  g.freq_count = static_cast<int>(r.integer("freq_count", def.freq_count, 1));
  r.finish();
  try {
    g.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("grid: ") + e.what());
  }
}

FieldSpec parse_field(Reader r) {
  FieldSpec f;
  f.freq_ghz = r.positive("freq_ghz");
  if (r.has("amp_ghz") == r.has("power_dbm")) {
    throw ValidationError(r.where() + ": give exactly one of amp_ghz or power_dbm");
  }
  if (r.has("amp_ghz")) {
    f.amp_ghz = r.non_negative("amp_ghz", 0.0);
  } else {
    f.power_dbm = r.number("power_dbm");
    f.amp_per_sqrt_mw_ghz = r.positive("amp_per_sqrt_mw_ghz");
  }
  r.finish();
  return f;
}

TransferFunction parse_transfer(Reader r) {
  TransferFunction t;
  const std::string kind = r.string("kind", "identity");
  if (kind == "identity") {
    t.kind = TransferFunction::Kind::Identity;
  } else if (kind == "lorentzian") {
    t.kind = TransferFunction::Kind::Lorentzian;
    t.center_ghz = r.positive("center_ghz");
    t.width_mhz = r.positive("width_mhz");
    t.peak = r.positive("peak", 1.0);
    t.floor = r.non_negative("floor", 0.0);
  } else if (kind == "curve") {
    t.kind = TransferFunction::Kind::Curve;
    const json& pts = r.raw("points");
    if (!pts.is_array() || pts.size() < 2) {
      throw ValidationError(r.child("points") + ": expected at least two [freq_ghz, gain] pairs");
    }
    for (size_t i = 0; i < pts.size(); ++i) {
      const auto& p = pts[i];
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number() ||
          !(p[1].get<double>() >= 0.0)) {
        throw ValidationError(r.child("points") + "[" + std::to_string(i) +
                              "]: expected [freq_ghz, gain >= 0]");
      }
      t.curve.emplace_back(p[0].get<double>(), p[1].get<double>());
      if (i > 0 && !(t.curve[i].first > t.curve[i - 1].first)) {
        throw ValidationError(r.child("points") + ": frequencies must increase");
      }
    }
  } else {
    throw ValidationError(r.child("kind") + ": expected identity, lorentzian or curve");
  }
  r.finish();
  return t;
}

SweepSpec parse_sweep(Reader r) {
  SweepSpec s;
  s.freq_start_ghz = r.positive("freq_start_ghz");
  s.freq_stop_ghz = r.positive("freq_stop_ghz");
  s.points = static_cast<int>(r.integer("points", 20, 1));
  if (!(s.freq_stop_ghz >= s.freq_start_ghz)) {
    throw ValidationError(r.child("freq_stop_ghz") + ": must not be below freq_start_ghz");
  }
  if (r.has("transfer")) s.transfer = parse_transfer(r.object("transfer"));
  r.finish();
  return s;
}

void parse_sense(Reader r, RunConfig& c) {
  c.sense.table = r.string("table", "");
  c.sense.trace1 = r.string("trace1", "");
  c.sense.trace2 = r.string("trace2", "");
  c.sense.weighted = r.boolean("weighted", false);
  c.sense.interpolate = r.boolean("interpolate", true);
  if (c.sense.trace1.empty() != c.sense.trace2.empty()) {
    throw ValidationError(r.where() + ": trace1 and trace2 must be given together");
  }
  r.finish();
}

void parse_phase_scan(Reader r, RunConfig& c) {
  auto& p = c.phase_scan;
  p.omega_a_mhz = r.positive("omega_a_mhz", 30.0);
  p.detuning_max_mhz = r.positive("detuning_max_mhz", 25.0);
  p.points = static_cast<int>(r.integer("points", 51, 2));
  p.phase_slope_rad_per_mhz = r.number("phase_slope_rad_per_mhz", 0.0);
  p.phase_offset_rad = r.number("phase_offset_rad", 0.0);
  if (!(p.detuning_max_mhz < p.omega_a_mhz)) {
    throw ValidationError(r.child("detuning_max_mhz") + ": must stay below omega_a_mhz");
  }
  r.finish();
}

void parse_synth(Reader r, RunConfig& c) {
  const long t = r.integer("transition", 1, 1);
  if (t > 2) throw ValidationError(r.child("transition") + ": must be 1 or 2");
  c.synth.transition = static_cast<int>(t);
  if (r.has("shift_hint_mhz")) c.synth.shift_hint_mhz = r.number("shift_hint_mhz");
  c.synth.noisy = r.boolean("noisy", true);
  r.finish();
}

}  // namespace

double TransferFunction::gain(double freq_ghz) const {
  switch (kind) {
    case Kind::Identity:
      return 1.0;
    case Kind::Lorentzian: {
      const double x = (freq_ghz - center_ghz) / (0.5 * width_mhz * 1e-3);
      return floor + (peak - floor) / (1.0 + x * x);
    }
    case Kind::Curve: {
      if (freq_ghz <= curve.front().first) return curve.front().second;
      if (freq_ghz >= curve.back().first) return curve.back().second;
      const auto hi = std::upper_bound(curve.begin(), curve.end(), freq_ghz,
                                       [](double f, const auto& p) { return f < p.first; });
      const auto lo = hi - 1;
      const double w = (freq_ghz - lo->first) / (hi->first - lo->first);
      return lo->second + w * (hi->second - lo->second);
    }
  }
  return 1.0;
}

double FieldSpec::source_amp_ghz() const {
  if (amp_ghz) return *amp_ghz;
  return amp_per_sqrt_mw_ghz * std::sqrt(std::pow(10.0, *power_dbm / 10.0));
}

lookup::GridSpec default_grid() {
  lookup::GridSpec g;
  g.amp_min = 0.0;
  g.amp_max = units::ghz_to_rad_ns(0.15);
  g.amp_count = 31;
  g.freq_min = units::ghz_to_rad_ns(4.75);
  g.freq_max = units::ghz_to_rad_ns(5.6);
  g.freq_count = 61;
  return g;
}

transmon::TransmonParams RunConfig::resolve_transmon() const {
  if (transmon) return *transmon;
  if (!targets_ghz) throw ValidationError("transmon: required block is missing");
  return transmon::fit_ej_ec(targets_ghz->first, targets_ghz->second, n_g, charge_cutoff, d_keep);
}

lookup::PipelineConfig RunConfig::pipeline() const { return {resolve_transmon(), ramsey}; }

RunConfig parse_config(const nlohmann::json& j) {
  RunConfig c;
  c.grid = default_grid();
  Reader root(j, "");
  if (root.has("transmon")) parse_transmon(root.object("transmon"), c);
  if (root.has("ramsey")) parse_ramsey(root.object("ramsey"), c);
  if (root.has("grid")) parse_grid(root.object("grid"), c);
  if (root.has("field")) c.field = parse_field(root.object("field"));
  if (root.has("sweep")) c.sweep = parse_sweep(root.object("sweep"));
  if (root.has("sense")) parse_sense(root.object("sense"), c);
  if (root.has("phase_scan")) parse_phase_scan(root.object("phase_scan"), c);
  if (root.has("synth")) parse_synth(root.object("synth"), c);
  if (root.has("seed")) c.seed = static_cast<std::uint64_t>(root.integer("seed", 0, 0));
  root.finish();
  c.ramsey.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  const std::string text = io::read_text(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config " + path + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace qsense::config
