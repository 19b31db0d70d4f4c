// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "vstap/error.hpp"
#include "vstap/io.hpp"
#include "vstap/pipeline.hpp"
#include "vstap/validate.hpp"

namespace vstap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
  std::string input;
  std::string output;
  std::string model;
  std::string report;
  std::size_t order = 0;
  std::size_t breakpoints = 20;
  double epsilon = 1e-5;
  std::size_t length = 0;  // 0: the fitted length
  std::uint64_t seed = 1;
  std::size_t realizations = 1;
  std::string mode = "piecewise";
  std::string format = "csv";
  std::size_t mc_samples = 2'000'000;
};

json base_report(const std::string& command) {
  return {{"schema_version", kSchemaVersion}, {"command", command}};
}

void emit(std::ostream& out, const RunConfig& cfg, const json& report) {
  const std::string text = report.dump(2) + "\n";
  if (!cfg.report.empty()) write_file_atomic(cfg.report, text);
  out << text;
}

FitOptions fit_options(const RunConfig& cfg) {
  FitOptions opt;
  opt.order = cfg.order;
  opt.breakpoints = cfg.breakpoints;
  opt.solver.epsilon = cfg.epsilon;
  return opt;
}

void require_distinct(const std::string& a, const std::string& b) {
  std::error_code ec;
  if (fs::weakly_canonical(a, ec) == fs::weakly_canonical(b, ec)) {
    throw Error(ErrorCode::InvalidInput, "input and output paths must differ");
  }
}

Table read_input(const RunConfig& cfg) {
  Table table = read_csv(cfg.input);
  for (Eigen::Index i = 0; i < table.data.rows(); ++i) {
    const auto row = table.data.row(i);
    if (row.minCoeff() == row.maxCoeff()) {
      throw Error(ErrorCode::DegenerateInput, "channel '" + table.names[static_cast<std::size_t>(i)] +
                                                  "' (column " + std::to_string(i + 1) +
                                                  ") is constant");
    }
  }
  return table;
}

json correlations_json(const Series& x, std::size_t P) {
  return lagged_set_to_json(estimate_lagged_correlations(x, P));
}

// Largest |r*(i,j,tau) - r(i,j,tau)| over all cells.
double max_deviation(const LaggedCorrelationSet& a, const LaggedCorrelationSet& b) {
  double worst = 0.0;
  for (std::size_t tau = 0; tau <= a.P(); ++tau) {
    worst = std::max(worst, (a.block(tau) - b.block(tau)).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::string numbered(const std::string& stem, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04zu", index);
  return stem + "_" + buf + ".csv";
}

int cmd_fit(const RunConfig& cfg, std::ostream& out) {
  require_distinct(cfg.input, cfg.output);
  const Table table = read_input(cfg);
  const VstapModel model = fit_vstap(table.data, fit_options(cfg));
  save_model(cfg.output, model, table.names);

  json report = base_report("fit");
  json pairs = json::array();
  double worst = 0.0;
  for (const auto& d : model.diagnostics.pairs) {
    pairs.push_back(diagnostic_to_json(d));
    worst = std::max(worst, std::abs(d.report.residual));
  }
  report["model"] = cfg.output;
  report["channels"] = table.names;
  report["n"] = model.n();
  report["P"] = model.P();
  report["breakpoints"] = cfg.breakpoints;
  report["epsilon"] = cfg.epsilon;
  report["pairs"] = std::move(pairs);
  report["max_abs_residual"] = worst;
  report["binary_searches"] = model.diagnostics.binary_searches;
  report["unconverged"] = model.diagnostics.unconverged;
  report["repair_rounds"] = model.diagnostics.repair_rounds;
  report["repair_distance"] = model.diagnostics.repair_distance;
  report["spectral_radius"] = model.var.spectral_radius();
  emit(out, cfg, report);
  return 0;
}

TransformMode parse_mode(const std::string& mode) {
  return mode == "exact" ? TransformMode::ExactMarginal : TransformMode::PiecewiseMarginal;
}

int cmd_generate(const RunConfig& cfg, std::ostream& out) {
  const NamedModel loaded = load_model(cfg.model);
  const VstapModel& model = loaded.model;
  const std::size_t N = cfg.length ? cfg.length : model.n();
  const fs::path dir(cfg.output);
  fs::create_directories(dir);

  json realizations = json::array();
  for (std::size_t r = 0; r < cfg.realizations; ++r) {
    const std::uint64_t seed = cfg.seed + r;
    Table table{loaded.names, generate(model, N, seed, parse_mode(cfg.mode))};
    const fs::path file = dir / numbered("realization", r + 1);
    write_csv(file, table);
    json entry = {{"file", file.string()}, {"seed", seed}};
    if (N > 4 * (model.P() + 1)) entry["lagged_corr"] = correlations_json(table.data, model.P());
    realizations.push_back(std::move(entry));
  }

  // Fisher bands of the target at the generated length; the unit diagonal has none.
  json bands = json::array();
  for (std::size_t tau = 0; tau <= model.P(); ++tau) {
    for (std::size_t i = 0; i < model.K(); ++i) {
      for (std::size_t j = 0; j < model.K(); ++j) {
        const double r = model.target_corr.at(i, j, tau);
        json cell = {{"i", i}, {"j", j}, {"lag", tau}, {"target", r}};
        if (std::abs(r) < 1.0 && N > 3) {
          const auto [lo, hi] = fisher_ci(r, N);
          cell["fisher_lo"] = lo;
          cell["fisher_hi"] = hi;
        }
        bands.push_back(std::move(cell));
      }
    }
  }

  json report = base_report("generate");
  report["model"] = cfg.model;
  report["length"] = N;
  report["mode"] = cfg.mode;
  report["seed"] = cfg.seed;
  report["realizations"] = std::move(realizations);
  report["fisher_bands"] = std::move(bands);
  write_file_atomic(dir / "generate.json", report.dump(2) + "\n");
  emit(out, cfg, report);
  return 0;
}

int cmd_surrogate(const RunConfig& cfg, std::ostream& out) {
  require_distinct(cfg.input, cfg.output);
  const Table table = read_input(cfg);
  const VstapModel model = fit_vstap(table.data, fit_options(cfg));
  const fs::path dir(cfg.output);
  fs::create_directories(dir);

  json surrogates = json::array();
  for (std::size_t b = 0; b < cfg.realizations; ++b) {
    const std::uint64_t seed = cfg.seed + b;
    Table s{table.names, surrogate_from_model(model, seed)};
    const fs::path file = dir / numbered("surrogate", b + 1);
    write_csv(file, s);
    const auto achieved = estimate_lagged_correlations(s.data, model.P());
    surrogates.push_back({{"file", file.string()},
                          {"seed", seed},
                          {"max_abs_corr_deviation", max_deviation(achieved, model.target_corr)}});
  }

  json report = base_report("surrogate");
  report["input"] = cfg.input;
  report["P"] = model.P();
  report["breakpoints"] = cfg.breakpoints;
  report["epsilon"] = cfg.epsilon;
  report["seed"] = cfg.seed;
  report["surrogates"] = std::move(surrogates);
  write_file_atomic(dir / "manifest.json", report.dump(2) + "\n");
  emit(out, cfg, report);
  return 0;
}

int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  ValidateOptions opt;
  opt.seed = cfg.seed;
  opt.mc_samples = cfg.mc_samples;
  const auto checks = run_validation(opt);
  json list = json::array();
  std::size_t failed = 0;
  for (const auto& c : checks) {
    if (!c.passed) ++failed;
    list.push_back({{"name", c.name},
                    {"passed", c.passed},
                    {"value", c.value},
                    {"expected", c.expected},
                    {"tolerance", c.tolerance},
                    {"detail", c.detail}});
  }
  json report = base_report("validate");
  report["seed"] = cfg.seed;
  report["checks"] = std::move(list);
  report["failed"] = failed;
  if (failed) {
    report["error"] = {{"code", "ValidationFailed"},
                       {"message", std::to_string(failed) + " check(s) failed"}};
  }
  emit(out, cfg, report);
  return failed ? 1 : 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multivariate time series with given marginals and lagged correlations"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto positive = CLI::PositiveNumber;
  auto* fit = app.add_subcommand("fit", "Fit a model to a CSV series");
  fit->add_option("--input", cfg.input, "Input CSV")->required();
  fit->add_option("--output", cfg.output, "Model JSON to write")->required();
  fit->add_option("--order", cfg.order, "Maximum lag P")->required()->check(positive);
  fit->add_option("--breakpoints", cfg.breakpoints, "Segments m")->check(CLI::Range(2, 1000));
  fit->add_option("--epsilon", cfg.epsilon, "Solver tolerance")->check(positive);
  fit->add_option("--report", cfg.report, "Also write the report here");

  auto* gen = app.add_subcommand("generate", "Generate realizations from a model");
  gen->add_option("--model,--input", cfg.model, "Model JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--output", cfg.output, "Output directory")->required();
  gen->add_option("--length", cfg.length, "Realization length N (default: fitted length)")
      ->check(positive);
  gen->add_option("--seed", cfg.seed, "Seed of the first realization");
  gen->add_option("--realizations", cfg.realizations, "Number of realizations")->check(positive);
  gen->add_option("--mode", cfg.mode, "Marginal map")->check(CLI::IsMember({"exact", "piecewise"}));
  gen->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv"}));
  gen->add_option("--report", cfg.report, "Also write the report here");

  auto* sur = app.add_subcommand("surrogate", "Surrogates preserving the exact sample values");
  sur->add_option("--input", cfg.input, "Input CSV")->required();
  sur->add_option("--output", cfg.output, "Output directory")->required();
  sur->add_option("--order", cfg.order, "Maximum lag P")->required()->check(positive);
  sur->add_option("--breakpoints", cfg.breakpoints, "Segments m")->check(CLI::Range(2, 1000));
  sur->add_option("--epsilon", cfg.epsilon, "Solver tolerance")->check(positive);
  sur->add_option("--seed", cfg.seed, "Seed of the first surrogate");
  sur->add_option("--realizations", cfg.realizations, "Number of surrogates")->check(positive);
  sur->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv"}));
  sur->add_option("--report", cfg.report, "Also write the report here");

  auto* val = app.add_subcommand("validate", "Run the built-in numerical self-checks");
  val->add_option("--seed", cfg.seed, "Monte-Carlo seed");
  val->add_option("--samples", cfg.mc_samples, "Monte-Carlo samples per check")
      ->check(CLI::Range(std::size_t{100000}, std::size_t{1'000'000'000}));
  val->add_option("--report", cfg.report, "Also write the report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    if (fit->parsed()) return cmd_fit(cfg, out);
    if (gen->parsed()) return cmd_generate(cfg, out);
    if (sur->parsed()) return cmd_surrogate(cfg, out);
    return cmd_validate(cfg, out);
  } catch (const InfeasibleTargets& e) {
    json report = base_report(command);
    json pairs = json::array();
    for (const auto& d : e.pairs()) pairs.push_back(diagnostic_to_json(d));
    report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()},
                       {"pairs", std::move(pairs)}};
    out << report.dump(2) << "\n";
  } catch (const Error& e) {
    json report = base_report(command);
    report["error"] = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
    out << report.dump(2) << "\n";
  } catch (const std::exception& e) {
    json report = base_report(command);
    report["error"] = {{"code", "IoError"}, {"message", e.what()}};
    out << report.dump(2) << "\n";
  }
  return 2;
}

}  // namespace vstap::cli
