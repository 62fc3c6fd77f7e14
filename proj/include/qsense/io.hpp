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

#include <string>

#include <nlohmann/json.hpp>

#include "qsense/fitting.hpp"
#include "qsense/lookup.hpp"
#include "qsense/trace.hpp"

namespace qsense::io {

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

/// Shortest round-trip decimal form of a double; "nan" for NaN.
std::string format_number(double x);
double parse_number(const std::string& s);

/// CSV with header "delay_ns,population".
std::string format_trace_csv(const RamseyTrace& trace);
RamseyTrace parse_trace_csv(const std::string& text);

nlohmann::json fit_to_json(const fitting::DampedSineFit& fit);
nlohmann::json shift_to_json(const fitting::ShiftMeasurement& m);
nlohmann::json sense_to_json(const lookup::SenseResult& r);

/// Minimal CSV writer: each row is joined with commas and terminated by '\n'.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);
  void add_row(const std::vector<double>& values);
  void add_row(const std::vector<std::string>& values);
  const std::string& str() const { return text_; }

 private:
  size_t width_;
  std::string text_;
};

}  // namespace qsense::io
