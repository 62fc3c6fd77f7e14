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

#include "qsense/io.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qsense/errors.hpp"
#include "qsense/units.hpp"

namespace qsense::io {

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& s) {
  std::string t = s;
  while (!t.empty() && std::isspace(static_cast<unsigned char>(t.back()))) t.pop_back();
  size_t start = 0;
  while (start < t.size() && std::isspace(static_cast<unsigned char>(t[start]))) ++start;
  t = t.substr(start);
  if (t == "nan" || t == "NaN") return std::nan("");
  if (t == "inf") return INFINITY;
  if (t == "-inf") return -INFINITY;
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    throw ValidationError("not a number: '" + s + "'");
  }
  return v;
}

std::string format_trace_csv(const RamseyTrace& trace) {
  CsvWriter csv({"delay_ns", "population"});
  for (size_t k = 0; k < trace.size(); ++k) csv.add_row({trace.delays[k], trace.populations[k]});
  return csv.str();
}

RamseyTrace parse_trace_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trace csv: empty file");
  if (line.rfind("delay_ns,population", 0) != 0) {
    throw ValidationError("trace csv: header must be 'delay_ns,population'");
  }
  RamseyTrace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ValidationError("trace csv: line " + std::to_string(lineno) + " needs two columns");
    }
    trace.delays.push_back(parse_number(line.substr(0, comma)));
    trace.populations.push_back(parse_number(line.substr(comma + 1)));
  }
  trace.validate();
  return trace;
}

nlohmann::json fit_to_json(const fitting::DampedSineFit& fit) {
  return {{"model", fitting::kModelId},
          {"omega_r_mhz", units::rad_ns_to_mhz(fit.omega_r)},
          {"sigma_r_khz", units::rad_ns_to_khz(fit.sigma_r)},
          {"amplitude", fit.amplitude},
          {"decay_tau_ns", fit.decay_tau},
          {"phase0_rad", fit.phase0},
          {"offset_amp", fit.offset_amp},
          {"offset_tau_ns", fit.offset_tau},
          {"offset_const", fit.offset_const},
          {"rms_residual", fit.rms_residual},
          {"iterations", fit.iterations}};
}

nlohmann::json shift_to_json(const fitting::ShiftMeasurement& m) {
  return {{"transition", m.transition},
          {"delta_mhz", units::rad_ns_to_mhz(m.delta)},
          {"sigma_khz", units::rad_ns_to_khz(m.sigma)},
          {"gate_freq_ghz", units::rad_ns_to_ghz(m.gate_freq)},
          {"bare_freq_ghz", units::rad_ns_to_ghz(m.bare_freq)}};
}

nlohmann::json sense_to_json(const lookup::SenseResult& r) {
  nlohmann::json j = {{"amp_ghz", units::rad_ns_to_ghz(r.amp)},
                      {"freq_ghz", units::rad_ns_to_ghz(r.freq)},
                      {"amp_err_ghz", units::rad_ns_to_ghz(r.amp_err)},
                      {"freq_err_ghz", units::rad_ns_to_ghz(r.freq_err)},
                      {"distance_khz", units::rad_ns_to_khz(r.distance)},
                      {"ambiguous", r.ambiguous},
                      {"clamped", r.clamped}};
  j["power_dbm"] = std::isfinite(r.power_dbm) ? nlohmann::json(r.power_dbm) : nlohmann::json();
  return j;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
  add_row(header);
}

void CsvWriter::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  add_row(cells);
}

void CsvWriter::add_row(const std::vector<std::string>& values) {
  if (values.size() != width_) throw Error("csv: row width does not match the header");
  for (size_t k = 0; k < values.size(); ++k) {
    if (k) text_ += ',';
    text_ += values[k];
  }
  text_ += '\n';
}

}  // namespace qsense::io
