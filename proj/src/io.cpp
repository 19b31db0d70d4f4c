// SPDX-License-Identifier: Apache-2.0
#include "vstap/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "vstap/error.hpp"

namespace vstap {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, std::size_t K, const char* what) {
  if (!rows.is_array() || rows.size() != K) {
    throw Error(ErrorCode::ParseError, std::string("model: ") + what + " must have K rows");
  }
  Eigen::MatrixXd m(K, K);
  for (std::size_t i = 0; i < K; ++i) {
    if (!rows[i].is_array() || rows[i].size() != K) {
      throw Error(ErrorCode::ParseError, std::string("model: ") + what + " must have K columns");
    }
    for (std::size_t j = 0; j < K; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j].get<double>();
    }
  }
  return m;
}

}  // namespace

Table parse_csv(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view rest(text);
  while (!rest.empty()) {
    const auto nl = rest.find('\n');
    const auto line = rest.substr(0, nl);
    if (!trim(line).empty()) lines.push_back(line);
    if (nl == std::string_view::npos) break;
    rest.remove_prefix(nl + 1);
  }
  if (lines.empty()) throw Error(ErrorCode::ParseError, "csv: empty input");

  Table table;
  std::string_view header = lines.front();
  if (header.starts_with("\xEF\xBB\xBF")) header.remove_prefix(3);
  for (auto name : split(header)) {
    if (name.empty()) throw Error(ErrorCode::ParseError, "csv: empty channel name in header");
    table.names.emplace_back(name);
  }
  const std::size_t K = table.names.size();
  const std::size_t n = lines.size() - 1;
  if (n == 0) throw Error(ErrorCode::ParseError, "csv: no data rows");
  table.data.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(n));
  for (std::size_t t = 0; t < n; ++t) {
    const auto fields = split(lines[t + 1]);
    const std::string where = "csv: row " + std::to_string(t + 2);
    if (fields.size() != K) {
      throw Error(ErrorCode::ParseError, where + " has " + std::to_string(fields.size()) +
                                             " fields, expected " + std::to_string(K));
    }
    for (std::size_t i = 0; i < K; ++i) {
      const auto f = fields[i];
      if (f.empty()) {
        throw Error(ErrorCode::ParseError, where + ": missing value for '" + table.names[i] + "'");
      }
      double v = 0.0;
      const char* begin = f.data() + (f.front() == '+' ? 1 : 0);
      const auto [ptr, ec] = std::from_chars(begin, f.data() + f.size(), v);
      if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw Error(ErrorCode::ParseError,
                    where + ": invalid number '" + std::string(f) + "' for '" + table.names[i] + "'");
      }
      table.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = v;
    }
  }
  return table;
}

Table read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path)); }

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error(ErrorCode::IoError, "format_double: conversion failed");
  return std::string(buf, ptr);
}

std::string format_csv(const Table& table) {
  if (static_cast<std::size_t>(table.data.rows()) != table.names.size()) {
    throw Error(ErrorCode::InvalidInput, "csv: name count differs from channel count");
  }
  std::string out;
  for (std::size_t i = 0; i < table.names.size(); ++i) {
    if (i) out += ',';
    out += table.names[i];
  }
  out += '\n';
  for (Eigen::Index t = 0; t < table.data.cols(); ++t) {
    for (Eigen::Index i = 0; i < table.data.rows(); ++i) {
      if (i) out += ',';
      out += format_double(table.data(i, t));
    }
    out += '\n';
  }
  return out;
}

void write_csv(const std::filesystem::path& path, const Table& table) {
  write_file_atomic(path, format_csv(table));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
  }
}

json lagged_set_to_json(const LaggedCorrelationSet& set) {
  json blocks = json::array();
  for (std::size_t tau = 0; tau <= set.P(); ++tau) blocks.push_back(matrix_to_json(set.block(tau)));
  return blocks;
}

LaggedCorrelationSet lagged_set_from_json(const json& blocks) {
  if (!blocks.is_array() || blocks.empty()) {
    throw Error(ErrorCode::ParseError, "model: correlation blocks must be a non-empty array");
  }
  const std::size_t K = blocks.front().size();
  std::vector<Eigen::MatrixXd> mats;
  for (const auto& b : blocks) mats.push_back(matrix_from_json(b, K, "correlation block"));
  return LaggedCorrelationSet::from_blocks(mats);
}

json diagnostic_to_json(const PairDiagnostic& d) {
  return {{"i", d.i},
          {"j", d.j},
          {"lag", d.lag},
          {"target", d.target},
          {"solved", d.report.solution},
          {"psi_at_solution", d.psi_at_solution},
          {"residual", d.report.residual},
          {"iterations", d.report.iterations},
          {"binary_search", d.report.used_binary_search},
          {"status", std::string(to_string(d.report.status))},
          {"start", d.start},
          {"feasible_lower", d.bounds.lower},
          {"feasible_upper", d.bounds.upper}};
}

json model_to_json(const VstapModel& model, const std::vector<std::string>& names) {
  if (names.size() != model.K()) {
    throw Error(ErrorCode::InvalidInput, "model: name count differs from channel count");
  }
  json channels = json::array();
  for (std::size_t i = 0; i < model.K(); ++i) {
    json segments = json::array();
    for (const auto& s : model.transforms[i].segments()) segments.push_back({s.intercept, s.slope});
    const auto v = model.marginals[i].values();
    channels.push_back({{"name", names[i]},
                        {"sample", std::vector<double>(v.begin(), v.end())},
                        {"segments", std::move(segments)}});
  }
  json A = json::array();
  for (const auto& a : model.var.A()) A.push_back(matrix_to_json(a));
  json pairs = json::array();
  for (const auto& d : model.diagnostics.pairs) pairs.push_back(diagnostic_to_json(d));
  const auto bp = model.transforms.front().breakpoints();
  return {{"schema_version", kSchemaVersion},
          {"kind", "vstap_model"},
          {"K", model.K()},
          {"P", model.P()},
          {"n", model.n()},
          {"breakpoints", std::vector<double>(bp.begin(), bp.end())},
          {"channels", std::move(channels)},
          {"target_corr", lagged_set_to_json(model.target_corr)},
          {"gaussian_corr", lagged_set_to_json(model.gaussian_corr)},
          {"var",
           {{"A", std::move(A)},
            {"sigma_e", matrix_to_json(model.var.sigma_e())},
            {"spectral_radius", model.var.spectral_radius()}}},
          {"diagnostics",
           {{"pairs", std::move(pairs)},
            {"repair_rounds", model.diagnostics.repair_rounds},
            {"repair_distance", model.diagnostics.repair_distance},
            {"min_eigenvalue", model.diagnostics.min_eigenvalue},
            {"binary_searches", model.diagnostics.binary_searches},
            {"unconverged", model.diagnostics.unconverged}}}};
}

NamedModel model_from_json(const json& doc) {
  try {
    if (doc.at("schema_version").get<int>() != kSchemaVersion) {
      throw Error(ErrorCode::ParseError, "model: unsupported schema_version");
    }
    const auto K = doc.at("K").get<std::size_t>();
    const auto breakpoints = doc.at("breakpoints").get<std::vector<double>>();
    const auto& channels = doc.at("channels");
    if (K == 0 || channels.size() != K) {
      throw Error(ErrorCode::ParseError, "model: channel list does not match K");
    }
    std::vector<std::string> names;
    std::vector<EmpiricalMarginal> marginals;
    std::vector<PiecewiseTransform> transforms;
    for (const auto& c : channels) {
      names.push_back(c.at("name").get<std::string>());
      marginals.emplace_back(c.at("sample").get<std::vector<double>>());
      std::vector<PiecewiseTransform::Segment> segments;
      for (const auto& s : c.at("segments")) {
        segments.push_back({s.at(0).get<double>(), s.at(1).get<double>()});
      }
      transforms.emplace_back(breakpoints, std::move(segments));
    }
    const auto& var = doc.at("var");
    std::vector<Eigen::MatrixXd> A;
    for (const auto& a : var.at("A")) A.push_back(matrix_from_json(a, K, "A"));
    Eigen::MatrixXd sigma = matrix_from_json(var.at("sigma_e"), K, "sigma_e");

    FitDiagnostics diag;
    if (doc.contains("diagnostics")) {
      const auto& d = doc.at("diagnostics");
      diag.repair_rounds = d.value("repair_rounds", 0);
      diag.repair_distance = d.value("repair_distance", 0.0);
      diag.min_eigenvalue = d.value("min_eigenvalue", 0.0);
      diag.binary_searches = d.value("binary_searches", std::size_t{0});
      diag.unconverged = d.value("unconverged", std::size_t{0});
      for (const auto& p : d.value("pairs", json::array())) {
        PairDiagnostic pd;
        pd.i = p.at("i").get<std::size_t>();
        pd.j = p.at("j").get<std::size_t>();
        pd.lag = p.at("lag").get<std::size_t>();
        pd.target = p.at("target").get<double>();
        pd.report.solution = p.at("solved").get<double>();
        pd.psi_at_solution = p.at("psi_at_solution").get<double>();
        pd.report.residual = p.at("residual").get<double>();
        pd.report.iterations = p.at("iterations").get<int>();
        pd.report.used_binary_search = p.at("binary_search").get<bool>();
        const auto status = p.at("status").get<std::string>();
        pd.report.status = status == "Converged"       ? SolveStatus::Converged
                           : status == "Infeasible"    ? SolveStatus::Infeasible
                                                       : SolveStatus::MaxIterations;
        pd.start = p.at("start").get<double>();
        pd.bounds = {p.at("feasible_lower").get<double>(), p.at("feasible_upper").get<double>()};
        diag.pairs.push_back(pd);
      }
    }

    auto target = lagged_set_from_json(doc.at("target_corr"));
    auto gaussian = lagged_set_from_json(doc.at("gaussian_corr"));
    if (target.K() != K || gaussian.K() != K || gaussian.P() != A.size()) {
      throw Error(ErrorCode::ParseError, "model: correlation blocks disagree with K or P");
    }
    VstapModel model{std::move(marginals), std::move(transforms), std::move(target),
                     std::move(gaussian), VarModel(std::move(A), std::move(sigma)), std::move(diag)};
    return {std::move(model), std::move(names)};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const VstapModel& model,
                const std::vector<std::string>& names) {
  write_file_atomic(path, model_to_json(model, names).dump(2) + "\n");
}

NamedModel load_model(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::ParseError, "model: " + path.string() + " is not valid JSON");
  return model_from_json(doc);
}

}  // namespace vstap
