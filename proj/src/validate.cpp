// SPDX-License-Identifier: Apache-2.0
#include "vstap/validate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "vstap/bvn.hpp"
#include "vstap/lagcorr.hpp"
#include "vstap/marginal.hpp"
#include "vstap/normal.hpp"
#include "vstap/oracle.hpp"
#include "vstap/rng.hpp"
#include "vstap/solver.hpp"

namespace vstap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

CheckResult make(std::string name, double value, double expected, double tolerance,
                 std::string detail = {}) {
  const bool ok = std::isfinite(value) && std::abs(value - expected) <= tolerance;
  return {std::move(name), ok, value, expected, tolerance, std::move(detail)};
}

std::string label(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

std::vector<double> draw(std::size_t n, std::uint64_t seed, double (*f)(GaussianStream&)) {
  GaussianStream g(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = f(g);
  return out;
}

void moment_checks(const ValidateOptions& opt, std::vector<CheckResult>& out) {
  const Rect rects[] = {{0.0, kInf, 0.0, kInf}, {-1.0, 0.5, -0.3, 1.2}, {-kInf, -0.5, 0.2, kInf}};
  const double rhos[] = {-0.6, 0.0, 0.7};
  std::uint64_t seed = opt.seed;
  int idx = 0;
  for (const auto& r : rects) {
    for (double rho : rhos) {
      const auto exact = trunc_moments(r, rho);
      const auto mc = mc_trunc_moments(r, rho, opt.mc_samples, seed++);
      const std::string tag = "trunc_moments[" + std::to_string(idx++) + "]";
      out.push_back(make(tag + ".p", exact.p, mc.p, 4 * mc.se_p));
      out.push_back(make(tag + ".mu10", exact.mu10, mc.mu10, 4 * mc.se_mu10));
      out.push_back(make(tag + ".mu01", exact.mu01, mc.mu01, 4 * mc.se_mu01));
      out.push_back(make(tag + ".mu11", exact.mu11, mc.mu11, 4 * mc.se_mu11));
    }
  }
}

void identity_checks(std::vector<CheckResult>& out) {
  auto grid = equiprobable_breakpoints(20);
  grid.insert(grid.begin(), -kInf);
  grid.push_back(kInf);
  for (double rho : {-0.9, 0.0, 0.5}) {
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
      for (std::size_t l = 0; l + 1 < grid.size(); ++l) {
        total += rect_partial_moments({grid[k], grid[k + 1], grid[l], grid[l + 1]}, rho).m11;
      }
    }
    out.push_back(make("total_expectation[rho=" + label(rho) + "]", total, rho, 1e-8));
  }
}

void psi_checks(const ValidateOptions& opt, std::vector<CheckResult>& out) {
  const auto sample = draw(20000, opt.seed + 101, [](GaussianStream& g) {
    const double z = g();
    return z * z * z;
  });
  const EmpiricalMarginal marginal(sample);
  const auto t = fit_piecewise(marginal, 20);
  const CorrelationMap psi(t, t);
  const ScalarMap map = [&t](double z) { return t(z); };
  std::uint64_t seed = opt.seed + 200;
  for (double rho : {-0.6, 0.3, 0.9}) {
    const auto mc = mc_psi(map, map, rho, opt.mc_samples, seed++);
    out.push_back(make("psi_vs_mc[rho=" + label(rho) + "]", psi(rho), mc.value,
                       4 * std::max(mc.std_error, mc.batch_std_error)));
  }
}

void solver_checks(const ValidateOptions& opt, std::vector<CheckResult>& out) {
  const auto sample = draw(5000, opt.seed + 300, [](GaussianStream& g) { return std::exp(g()); });
  const EmpiricalMarginal marginal(sample);
  const auto t = fit_piecewise(marginal, 20);
  const CorrelationMap psi(t, t);
  for (double rho : {-0.5, 0.3, 0.8}) {
    const auto report = solve_gaussian_corr(psi, psi(rho), 0.0);
    out.push_back(make("solver_round_trip[rho=" + label(rho) + "]", report.solution, rho, 1e-3,
                       std::string(to_string(report.status))));
  }
}

void norta_checks(const ValidateOptions& opt, std::vector<CheckResult>& out) {
  std::vector<PiecewiseTransform> transforms;
  for (std::uint64_t c = 0; c < 3; ++c) {
    const auto sample = draw(100000, opt.seed + 400 + c, [](GaussianStream& g) { return g.uniform(); });
    transforms.push_back(fit_piecewise(EmpiricalMarginal(sample), 20));
  }
  const std::pair<int, int> pairs[] = {{0, 1}, {0, 2}, {1, 2}};
  const double targets[] = {-0.4, 0.2, 0.8};
  for (int k = 0; k < 3; ++k) {
    const auto [a, b] = pairs[k];
    const auto report = solve_gaussian_corr(CorrelationMap(transforms[a], transforms[b]),
                                            targets[k], targets[k]);
    const double exact = 2.0 * std::sin(kPi * targets[k] / 6.0);
    out.push_back(make("norta_uniform[" + label(targets[k]) + "]", report.solution, exact, 5e-3));
  }
}

void repair_checks(std::vector<CheckResult>& out) {
  LaggedCorrelationSet set(3, 0);
  set.set(0, 1, 0, -0.4158);
  set.set(0, 2, 0, 0.2091);
  set.set(1, 2, 0, 0.8135);
  const auto result = psd_repair(assemble_full_matrix(set));
  const auto& m = result.matrix.values;
  out.push_back(make("repair[0,1]", m(0, 1), -0.4122, 5e-3));
  out.push_back(make("repair[0,2]", m(0, 2), 0.2062, 5e-3));
  out.push_back(make("repair[1,2]", m(1, 2), 0.8065, 5e-3));
  CheckResult pd{"repair_positive_definite", result.converged && result.min_eigenvalue > 0.0,
                 result.min_eigenvalue, 0.0, 0.0,
                 "rounds=" + std::to_string(result.rounds)};
  out.push_back(std::move(pd));
}

}  // namespace

std::vector<CheckResult> run_validation(const ValidateOptions& options) {
  std::vector<CheckResult> out;
  moment_checks(options, out);
  identity_checks(out);
  psi_checks(options, out);
  solver_checks(options, out);
  norta_checks(options, out);
  repair_checks(out);
  return out;
}

}  // namespace vstap
