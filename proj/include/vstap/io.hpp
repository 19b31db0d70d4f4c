// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "vstap/lagcorr.hpp"
#include "vstap/pipeline.hpp"

namespace vstap {

inline constexpr int kSchemaVersion = 1;

/// Channels as named columns: header row, then one row per time index.
struct Table {
  std::vector<std::string> names;
  Series data;  // K x n
};

/// Missing or non-numeric fields throw ParseError naming row and column.
Table read_csv(const std::filesystem::path& path);
Table parse_csv(const std::string& text);

/// Values are printed with 17 significant digits, so reading the file back
/// reproduces them exactly.
std::string format_csv(const Table& table);
void write_csv(const std::filesystem::path& path, const Table& table);

std::string format_double(double value);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

struct NamedModel {
  VstapModel model;
  std::vector<std::string> names;
};

nlohmann::json model_to_json(const VstapModel& model, const std::vector<std::string>& names);
NamedModel model_from_json(const nlohmann::json& doc);

void save_model(const std::filesystem::path& path, const VstapModel& model,
                const std::vector<std::string>& names);
NamedModel load_model(const std::filesystem::path& path);

nlohmann::json lagged_set_to_json(const LaggedCorrelationSet& set);
LaggedCorrelationSet lagged_set_from_json(const nlohmann::json& blocks);

nlohmann::json diagnostic_to_json(const PairDiagnostic& d);

}  // namespace vstap
