// SPDX-License-Identifier: Apache-2.0
#include "vstap/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "vstap/error.hpp"

namespace vstap {

namespace {

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Pearson correlation of paired samples; throws DegenerateInput on zero variance.
double pearson(std::span<const double> x, std::span<const double> y, const char* where) {
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double dx = x[t] - mx;
    const double dy = y[t] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    throw Error(ErrorCode::DegenerateInput, std::string(where) + ": zero-variance input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

SolveReport bisect(const CorrelationMap& psi, double target, double a, double b,
                   SolveReport report, const SolverOptions& opt) {
  report.used_binary_search = true;
  double fa = psi(a) - target;
  double fb = psi(b) - target;
  ++report.iterations;
  if (fa * fb > 0.0) {
    // No sign change inside [threshold, current]: report the best end.
    const bool a_better = std::abs(fa) < std::abs(fb);
    report.solution = a_better ? a : b;
    report.residual = -(a_better ? fa : fb);
    report.status = SolveStatus::MaxIterations;
    return report;
  }
  while (report.iterations < opt.max_iter) {
    const double mid = 0.5 * (a + b);
    const double fm = psi(mid) - target;
    ++report.iterations;
    report.solution = mid;
    report.residual = -fm;
    if (std::abs(fm) < opt.epsilon) {
      report.status = SolveStatus::Converged;
      return report;
    }
    if ((fm < 0.0) == (fa < 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
    if (a == mid && b == mid) break;
  }
  report.status = SolveStatus::MaxIterations;
  return report;
}

}  // namespace

std::string_view to_string(SolveStatus status) noexcept {
  switch (status) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::Infeasible: return "Infeasible";
  }
  return "Unknown";
}

double naive_corr(std::span<const double> zi, std::span<const double> zj) {
  if (zi.size() != zj.size() || zi.size() < 3) {
    throw Error(ErrorCode::InvalidInput, "naive_corr: need equal lengths >= 3");
  }
  return pearson(zi, zj, "naive_corr");
}

FeasibleBounds feasible_bounds(std::span<const double> xi, std::span<const double> xj) {
  if (xi.size() != xj.size() || xi.size() < 2) {
    throw Error(ErrorCode::InvalidInput, "feasible_bounds: need equal lengths >= 2");
  }
  std::vector<double> xs(xi.begin(), xi.end());
  std::vector<double> ys(xj.begin(), xj.end());
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double upper = pearson(xs, ys, "feasible_bounds");
  std::reverse(ys.begin(), ys.end());
  const double lower = pearson(xs, ys, "feasible_bounds");
  return {lower, upper};
}

SolveReport solve_gaussian_corr(const CorrelationMap& psi, double target, double start,
                                const SolverOptions& opt) {
  if (!std::isfinite(target) || std::abs(target) > 1.0) {
    throw Error(ErrorCode::InvalidInput, "solve_gaussian_corr: target must lie in [-1,1]");
  }
  if (!(opt.epsilon > 0.0) || opt.max_iter < 1) {
    throw Error(ErrorCode::InvalidInput, "solve_gaussian_corr: epsilon and max_iter must be positive");
  }
  if (!std::isfinite(start) || std::abs(start) > 1.0) {
    throw Error(ErrorCode::InvalidInput, "solve_gaussian_corr: start must lie in [-1,1]");
  }
  const double lim = opt.rho_limit;
  auto clamp = [lim](double r) { return std::clamp(r, -lim, lim); };

  SolveReport report;
  const double at_lo = psi(-lim);
  const double at_hi = psi(lim);
  const double attain_lo = std::min(at_lo, at_hi);
  const double attain_hi = std::max(at_lo, at_hi);
  if (target > attain_hi + opt.epsilon || target < attain_lo - opt.epsilon) {
    const bool above = target > attain_hi;
    report.solution = (above == (at_hi >= at_lo)) ? lim : -lim;
    report.residual = target - (report.solution > 0.0 ? at_hi : at_lo);
    report.status = SolveStatus::Infeasible;
    return report;
  }

  double r = clamp(start);
  double best_r = r;
  double best_res = std::numeric_limits<double>::infinity();
  while (report.iterations < opt.max_iter) {
    const double value = psi(r);
    const double res = target - value;
    ++report.iterations;
    if (std::abs(res) < std::abs(best_res)) {
      best_r = r;
      best_res = res;
    }
    if (std::abs(res) < opt.epsilon) {
      report.solution = r;
      report.residual = res;
      report.status = SolveStatus::Converged;
      return report;
    }
    if (std::abs(r) > opt.monotonic_threshold) {
      const double sign = r > 0.0 ? 1.0 : -1.0;
      const double inner = psi(r - sign * opt.monotonic_step);
      if (sign * (value - inner) < 0.0) {
        return bisect(psi, target, sign * opt.monotonic_threshold, r, report, opt);
      }
    }
    r = clamp(r + res);
  }
  report.solution = best_r;
  report.residual = best_res;
  report.status = SolveStatus::MaxIterations;
  return report;
}

SolveReport solve_gaussian_corr(const PiecewiseTransform& ti, const PiecewiseTransform& tj,
                                double target, double start, const SolverOptions& options,
                                ChannelStats si, ChannelStats sj) {
  return solve_gaussian_corr(CorrelationMap(ti, tj, si, sj), target, start, options);
}

}  // namespace vstap
