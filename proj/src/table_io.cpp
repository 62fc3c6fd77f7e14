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

#include "qsense/table_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "qsense/errors.hpp"
#include "qsense/io.hpp"
#include "qsense/units.hpp"

namespace qsense::lookup {

namespace {

constexpr const char* kHeaderTag = "# qsense-table ";

nlohmann::json times_to_json(const std::vector<double>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double t : v) out.push_back(std::isfinite(t) ? nlohmann::json(t) : nlohmann::json());
  return out;
}

std::vector<double> times_from_json(const nlohmann::json& j) {
  std::vector<double> out;
  for (const auto& e : j) out.push_back(e.is_null() ? INFINITY : e.get<double>());
  return out;
}

// Rounds every number to 12 significant digits so that unit conversions
// that differ in the last bit still hash identically.
nlohmann::json canonical(const nlohmann::json& j) {
  if (j.is_object()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : j.items()) out[k] = canonical(v);
    return out;
  }
  if (j.is_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : j) out.push_back(canonical(v));
    return out;
  }
  if (j.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", j.get<double>());
    return std::string(buf);
  }
  return j;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

template <typename Matrix, typename Format>
void write_block(std::ostringstream& out, const std::string& name, const Matrix& m, Format fmt) {
  out << '[' << name << "]\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << fmt(m(r, c));
    }
    out << '\n';
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  return out;
}

// The external value whose conversion back reproduces v bit for bit, so a
// table survives read and rewrite unchanged. Searches a few ulps around the
// direct conversion.
double exact_external(double v, double (*to)(double), double (*back)(double)) {
  const double m = to(v);
  if (!std::isfinite(m) || back(m) == v) return m;
  double up = m, down = m;
  for (int k = 0; k < 8; ++k) {
    up = std::nextafter(up, INFINITY);
    if (back(up) == v) return up;
    down = std::nextafter(down, -INFINITY);
    if (back(down) == v) return down;
  }
  return m;
}

double exact_mhz(double v) { return exact_external(v, units::rad_ns_to_mhz, units::mhz_to_rad_ns); }
double exact_ghz(double v) { return exact_external(v, units::rad_ns_to_ghz, units::ghz_to_rad_ns); }

}  // namespace

nlohmann::json ramsey_to_json(const dynamics::RamseyConfig& c) {
  nlohmann::json j = {{"delta_t_max_ns", c.delta_t_max},
                      {"n_steps", c.n_steps},
                      {"gate_amp_mhz", units::rad_ns_to_mhz(c.gate_amp)},
                      {"gate_offset1_mhz", units::rad_ns_to_mhz(c.gate_offset1)},
                      {"gate_offset2_mhz", units::rad_ns_to_mhz(c.gate_offset2)},
                      {"counter_rotating", c.counter_rotating},
                      {"step_safety", c.step_safety}};
  if (c.dissipation) {
    j["dissipation"] = {{"t1_ns", times_to_json(c.dissipation->relaxation)},
                        {"t_phi_ns", times_to_json(c.dissipation->dephasing)}};
  }
  return j;
}

dynamics::RamseyConfig ramsey_from_json(const nlohmann::json& j) {
  dynamics::RamseyConfig c;
  c.delta_t_max = j.value("delta_t_max_ns", c.delta_t_max);
  c.n_steps = j.value("n_steps", c.n_steps);
  if (j.contains("gate_amp_mhz")) c.gate_amp = units::mhz_to_rad_ns(j.at("gate_amp_mhz").get<double>());
  c.gate_offset1 = units::mhz_to_rad_ns(j.value("gate_offset1_mhz", 0.0));
  c.gate_offset2 = units::mhz_to_rad_ns(j.value("gate_offset2_mhz", 0.0));
  c.counter_rotating = j.value("counter_rotating", c.counter_rotating);
  c.step_safety = j.value("step_safety", c.step_safety);
  if (j.contains("dissipation")) {
    const auto& d = j.at("dissipation");
    dynamics::DissipationSpec spec;
    if (d.contains("t1_ns")) spec.relaxation = times_from_json(d.at("t1_ns"));
    if (d.contains("t_phi_ns")) spec.dephasing = times_from_json(d.at("t_phi_ns"));
    c.dissipation = spec;
  }
  return c;
}

nlohmann::json pipeline_to_json(const PipelineConfig& config) {
  nlohmann::json t;
  transmon::to_json(t, config.transmon);
  return {{"transmon", t}, {"ramsey", ramsey_to_json(config.ramsey)}};
}

PipelineConfig pipeline_from_json(const nlohmann::json& j) {
  PipelineConfig c;
  transmon::from_json(j.at("transmon"), c.transmon);
  c.ramsey = ramsey_from_json(j.at("ramsey"));
  return c;
}

std::uint64_t pipeline_hash(const PipelineConfig& config) {
  nlohmann::json j = canonical(pipeline_to_json(config));
  j["fit_model"] = fitting::kModelId;
  return fnv1a(j.dump());
}

std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void check_pipeline(const LookupGrid& grid, const PipelineConfig& config) {
  const std::uint64_t table = pipeline_hash(grid.config);
  const std::uint64_t run = pipeline_hash(config);
  if (table != run) {
    throw ValidationError("table pipeline hash " + hash_hex(table) +
                          " does not match the sensing configuration " + hash_hex(run) +
                          "; regenerate the table with the same transmon and ramsey settings");
  }
  if (grid.fit_model != fitting::kModelId) {
    throw ValidationError("table was fitted with model '" + grid.fit_model + "'");
  }
}

std::string format_table(const LookupGrid& grid) {
  nlohmann::json axes = {{"amp_ghz", nlohmann::json::array()}, {"freq_ghz", nlohmann::json::array()}};
  for (double a : grid.amp_axis) axes["amp_ghz"].push_back(exact_ghz(a));
  for (double f : grid.freq_axis) axes["freq_ghz"].push_back(exact_ghz(f));
  const SensorLimits lim = grid.config.sensor_limits();
  nlohmann::json header = {
      {"format_version", kTableFormatVersion},
      {"generator_version", grid.generator_version},
      {"fit_model", grid.fit_model},
      {"pipeline", pipeline_to_json(grid.config)},
      {"pipeline_hash", hash_hex(pipeline_hash(grid.config))},
      {"axes", axes},
      {"limits", {{"delta1_max_mhz", units::rad_ns_to_mhz(lim.delta1_max)},
                  {"delta2_min_mhz", units::rad_ns_to_mhz(lim.delta2_min)},
                  {"n_r", lim.n_r},
                  {"delta_t_max_ns", lim.delta_t_max}}},
      {"complete", grid.complete()}};

  std::ostringstream out;
  out << kHeaderTag << header.dump() << '\n';
  auto mhz = [](double v) { return io::format_number(exact_mhz(v)); };
  auto integer = [](int v) { return std::to_string(v); };
  write_block(out, "delta1_mhz", grid.delta1, mhz);
  write_block(out, "delta2_mhz", grid.delta2, mhz);
  write_block(out, "status", grid.status, integer);
  write_block(out, "in_range", grid.in_range_mask(), integer);
  return out.str();
}

LookupGrid parse_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind(kHeaderTag, 0) != 0) {
    throw ValidationError("table: missing '# qsense-table' header line");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line.substr(std::string(kHeaderTag).size()));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("table: malformed header: ") + e.what());
  }
  if (header.value("format_version", 0) != kTableFormatVersion) {
    throw ValidationError("table: unsupported format_version");
  }

  LookupGrid grid;
  try {
    grid.config = pipeline_from_json(header.at("pipeline"));
    grid.fit_model = header.at("fit_model").get<std::string>();
    grid.generator_version = header.at("generator_version").get<std::string>();
    for (double a : header.at("axes").at("amp_ghz")) grid.amp_axis.push_back(units::ghz_to_rad_ns(a));
    for (double f : header.at("axes").at("freq_ghz")) grid.freq_axis.push_back(units::ghz_to_rad_ns(f));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("table: incomplete header: ") + e.what());
  }
  if (hash_hex(pipeline_hash(grid.config)) != header.value("pipeline_hash", "")) {
    throw ValidationError("table: stored pipeline hash does not match the stored pipeline");
  }
  const auto rows = static_cast<Eigen::Index>(grid.amp_axis.size());
  const auto cols = static_cast<Eigen::Index>(grid.freq_axis.size());
  if (rows == 0 || cols == 0) throw ValidationError("table: empty axes");
  grid.delta1.resize(rows, cols);
  grid.delta2.resize(rows, cols);
  grid.status.resize(rows, cols);

  auto read_block = [&](const std::string& name, auto&& store) {
    if (!std::getline(in, line) || line != "[" + name + "]") {
      throw ValidationError("table: expected block [" + name + "]");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (!std::getline(in, line)) throw ValidationError("table: block " + name + " is truncated");
      const auto cells = split(line, ',');
      if (static_cast<Eigen::Index>(cells.size()) != cols) {
        throw ValidationError("table: block " + name + " row " + std::to_string(r) +
                              " has the wrong width");
      }
      for (Eigen::Index c = 0; c < cols; ++c) store(r, c, cells[static_cast<size_t>(c)]);
    }
  };
  read_block("delta1_mhz", [&](auto r, auto c, const std::string& s) {
    grid.delta1(r, c) = units::mhz_to_rad_ns(io::parse_number(s));
  });
  read_block("delta2_mhz", [&](auto r, auto c, const std::string& s) {
    grid.delta2(r, c) = units::mhz_to_rad_ns(io::parse_number(s));
  });
  read_block("status", [&](auto r, auto c, const std::string& s) {
    const int v = static_cast<int>(io::parse_number(s));
    if (v < 0 || v > 2) throw ValidationError("table: invalid status entry");
    grid.status(r, c) = v;
  });
  return grid;
}

void write_table(const std::string& path, const LookupGrid& grid) {
  io::write_atomic(path, format_table(grid));
}

LookupGrid read_table(const std::string& path) { return parse_table(io::read_text(path)); }

}  // namespace qsense::lookup
