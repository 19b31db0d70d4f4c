// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <catch_amalgamated.hpp>
#include <json.hpp>

#include "commands.hpp"
#include "support/systems.hpp"
#include "vstap/io.hpp"
#include "vstap/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  json report;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "vstap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = vstap::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  json report;
  if (!out.str().empty() && out.str().front() == '{') report = json::parse(out.str());
  return {code, report};
}

fs::path workdir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "vstap_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path cubic_csv(const fs::path& dir, std::size_t n = 1024) {
  const auto s = testsupport::simulate_reference(testsupport::var22(), n, 1);
  vstap::Table t{{"s1", "s2"}, testsupport::power_map(s, 3)};
  const auto path = dir / "input.csv";
  vstap::write_csv(path, t);
  return path;
}

std::vector<std::vector<double>> sorted_channels(const vstap::Table& t) {
  std::vector<std::vector<double>> out;
  for (Eigen::Index i = 0; i < t.data.rows(); ++i) {
    std::vector<double> v(t.data.row(i).data(), t.data.row(i).data() + t.data.cols());
    std::sort(v.begin(), v.end());
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

TEST_CASE("fit writes a model and reports residuals", "[cli]") {
  const auto dir = workdir("fit");
  const auto input = cubic_csv(dir);
  const auto model = dir / "model.json";
  const auto r = run({"fit", "--input", input.string(), "--output", model.string(), "--order", "2"});
  REQUIRE(r.code == 0);
  CHECK(fs::exists(model));
  CHECK(r.report["schema_version"].is_number());
  CHECK_FALSE(r.report.contains("error"));
  CHECK(r.report["max_abs_residual"].get<double>() < r.report["epsilon"].get<double>());
  for (const auto& p : r.report["pairs"]) CHECK(std::abs(p["residual"].get<double>()) < 1e-5);
}

TEST_CASE("fit rejects a constant column by name", "[cli]") {
  const auto dir = workdir("constant");
  const auto path = dir / "input.csv";
  {
    std::ofstream f(path);
    f << "alpha,flat\n";
    vstap::GaussianStream g(2);
    for (int t = 0; t < 200; ++t) f << g() << ",3.5\n";
  }
  const auto r = run({"fit", "--input", path.string(), "--output", (dir / "m.json").string(), "--order", "1"});
  CHECK(r.code != 0);
  REQUIRE(r.report.contains("error"));
  CHECK(r.report["error"]["code"] == "DegenerateInput");
  CHECK(r.report["error"]["message"].get<std::string>().find("flat") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "m.json"));
}

TEST_CASE("fit reports parse errors and bad arguments", "[cli]") {
  const auto dir = workdir("bad");
  const auto path = dir / "input.csv";
  {
    std::ofstream f(path);
    f << "a,b\n1,2\n3,\n";
  }
  const auto r = run({"fit", "--input", path.string(), "--output", (dir / "m.json").string(), "--order", "1"});
  CHECK(r.code != 0);
  CHECK(r.report["error"]["code"] == "ParseError");

  CHECK(run({"fit", "--input", path.string(), "--output", (dir / "m.json").string()}).code != 0);
  CHECK(run({"fit", "--input", path.string(), "--output", path.string(), "--order", "1"}).code != 0);
}

TEST_CASE("generate writes realizations", "[cli]") {
  const auto dir = workdir("generate");
  const auto input = cubic_csv(dir, 600);
  const auto model = dir / "model.json";
  REQUIRE(run({"fit", "--input", input.string(), "--output", model.string(), "--order", "2"}).code == 0);
  const auto out = dir / "out";
  const auto r = run({"generate", "--model", model.string(), "--output", out.string(), "--realizations", "3",
                      "--seed", "7", "--mode", "exact"});
  REQUIRE(r.code == 0);
  CHECK(r.report["realizations"].size() == 3);
  CHECK(fs::exists(out / "generate.json"));
  const auto first = vstap::read_csv(out / "realization_0001.csv");
  CHECK(first.names == std::vector<std::string>{"s1", "s2"});
  CHECK(sorted_channels(first) == sorted_channels(vstap::read_csv(input)));

  const auto again = dir / "again";
  REQUIRE(run({"generate", "--model", model.string(), "--output", again.string(), "--realizations", "3",
               "--seed", "7", "--mode", "exact"})
              .code == 0);
  CHECK(vstap::read_csv(again / "realization_0002.csv").data == vstap::read_csv(out / "realization_0002.csv").data);

  {
    std::ofstream f(dir / "broken.json");
    f << "{ not json";
  }
  CHECK(run({"generate", "--model", (dir / "broken.json").string(), "--output", (dir / "x").string()}).code != 0);
}

TEST_CASE("surrogate keeps the sample values", "[cli]") {
  const auto dir = workdir("surrogate");
  const auto input = cubic_csv(dir, 500);
  const auto original = sorted_channels(vstap::read_csv(input));

  const auto one = dir / "one";
  REQUIRE(run({"surrogate", "--input", input.string(), "--output", one.string(), "--order", "2",
               "--realizations", "1"})
              .code == 0);
  CHECK(sorted_channels(vstap::read_csv(one / "surrogate_0001.csv")) == original);

  const auto many = dir / "many";
  const auto r = run({"surrogate", "--input", input.string(), "--output", many.string(), "--order", "2",
                      "--realizations", "19", "--seed", "100"});
  REQUIRE(r.code == 0);
  CHECK(r.report["surrogates"].size() == 19);
  std::set<std::vector<double>> distinct;
  for (std::size_t b = 1; b <= 19; ++b) {
    char name[32];
    std::snprintf(name, sizeof name, "surrogate_%04zu.csv", b);
    const auto t = vstap::read_csv(many / name);
    CHECK(sorted_channels(t) == original);
    distinct.insert(std::vector<double>(t.data.data(), t.data.data() + t.data.size()));
  }
  CHECK(distinct.size() == 19);
}

TEST_CASE("validate passes by default", "[cli]") {
  const auto r = run({"validate", "--samples", "1000000"});
  CHECK(r.code == 0);
  CHECK(r.report["failed"] == 0);
  CHECK_FALSE(r.report.contains("error"));
}
