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

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "qsense/lookup.hpp"

namespace qsense::lookup {

inline constexpr int kTableFormatVersion = 1;

nlohmann::json pipeline_to_json(const PipelineConfig& config);
PipelineConfig pipeline_from_json(const nlohmann::json& j);

nlohmann::json ramsey_to_json(const dynamics::RamseyConfig& config);
dynamics::RamseyConfig ramsey_from_json(const nlohmann::json& j);

/// FNV-1a 64-bit hash of the canonical JSON form of the pipeline plus the
/// fit-model identifier. Tables and sensing runs must agree on it.
std::uint64_t pipeline_hash(const PipelineConfig& config);
std::string hash_hex(std::uint64_t h);

/// Throws ValidationError when the table was generated with a different
/// pipeline than `config`.
void check_pipeline(const LookupGrid& grid, const PipelineConfig& config);

/// Text form: one header line "# qsense-table <json>" followed by CSV
/// blocks [delta1_mhz], [delta2_mhz], [status] and [in_range], rows
/// indexed by amplitude. Holes and pending entries are written as nan.
std::string format_table(const LookupGrid& grid);
LookupGrid parse_table(const std::string& text);

void write_table(const std::string& path, const LookupGrid& grid);
LookupGrid read_table(const std::string& path);

}  // namespace qsense::lookup
