// SPDX-License-Identifier: Apache-2.0
#include "vstap/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "vstap/normal.hpp"

namespace vstap {

namespace {

std::string describe(const std::vector<PairDiagnostic>& pairs) {
  std::ostringstream out;
  out << pairs.size() << " infeasible target correlation(s):";
  for (const auto& d : pairs) {
    out << " (i=" << d.i << ", j=" << d.j << ", lag=" << d.lag << ", target=" << d.target
        << ", bounds=[" << d.bounds.lower << ", " << d.bounds.upper << "])";
  }
  return out.str();
}

std::vector<double> row_vector(const Series& s, Eigen::Index i) {
  const auto row = s.row(i);
  return std::vector<double>(row.data(), row.data() + row.size());
}

}  // namespace

InfeasibleTargets::InfeasibleTargets(std::vector<PairDiagnostic> pairs)
    : Error(ErrorCode::Infeasible, describe(pairs)), pairs_(std::move(pairs)) {}

VstapModel fit_vstap(const Series& series, const FitOptions& options) {
  const auto K = static_cast<std::size_t>(series.rows());
  const auto n = static_cast<std::size_t>(series.cols());
  const std::size_t P = options.order;
  const std::size_t m = options.breakpoints;
  if (K == 0) throw Error(ErrorCode::InvalidInput, "fit_vstap: no channels");
  if (P == 0) throw Error(ErrorCode::InvalidInput, "fit_vstap: order must be >= 1");
  if (n <= std::max(4 * (P + 1), 2 * m)) {
    throw Error(ErrorCode::InsufficientData,
                "fit_vstap: need n > max(4(P+1), 2m) (n=" + std::to_string(n) + ")");
  }

  std::vector<std::vector<double>> samples;
  std::vector<EmpiricalMarginal> marginals;
  std::vector<PiecewiseTransform> transforms;
  std::vector<std::vector<double>> gaussian;
  for (std::size_t i = 0; i < K; ++i) {
    samples.push_back(row_vector(series, static_cast<Eigen::Index>(i)));
    marginals.emplace_back(samples.back());
    if (marginals.back().min() == marginals.back().max()) {
      throw Error(ErrorCode::DegenerateInput, "fit_vstap: channel " + std::to_string(i) + " is constant");
    }
    transforms.push_back(fit_piecewise(marginals.back(), m));
    gaussian.push_back(gaussianize(marginals.back(), samples.back()));
  }

  LaggedCorrelationSet target = estimate_lagged_correlations(series, P);
  LaggedCorrelationSet solved(K, P);
  FitDiagnostics diag;
  std::vector<PairDiagnostic> infeasible;

  for (std::size_t tau = 0; tau <= P; ++tau) {
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        if (tau == 0 && j <= i) continue;
        PairDiagnostic d;
        d.i = i;
        d.j = j;
        d.lag = tau;
        d.target = target.at(i, j, tau);
        try {
          d.bounds = feasible_bounds(samples[i], samples[j]);
          const std::span<const double> zi(gaussian[i]);
          const std::span<const double> zj(gaussian[j]);
          d.start = naive_corr(zi.subspan(tau), zj.first(n - tau));
          const CorrelationMap psi(transforms[i], transforms[j]);
          if (d.target < d.bounds.lower || d.target > d.bounds.upper) {
            d.report.status = SolveStatus::Infeasible;
            d.report.solution = d.target < d.bounds.lower ? -options.solver.rho_limit
                                                          : options.solver.rho_limit;
          } else {
            d.report = solve_gaussian_corr(psi, d.target, d.start, options.solver);
          }
          d.psi_at_solution = psi(d.report.solution);
          d.report.residual = d.target - d.psi_at_solution;
        } catch (const Error& e) {
          throw Error(e.code(), "pair (i=" + std::to_string(i) + ", j=" + std::to_string(j) +
                                    ", lag=" + std::to_string(tau) + "): " + e.what());
        }
        if (d.report.status == SolveStatus::Infeasible) {
          infeasible.push_back(d);
        } else {
          solved.set(i, j, tau, d.report.solution);
        }
        if (d.report.used_binary_search) ++diag.binary_searches;
        if (d.report.status == SolveStatus::MaxIterations) ++diag.unconverged;
        diag.pairs.push_back(d);
      }
    }
  }
  if (!infeasible.empty()) throw InfeasibleTargets(std::move(infeasible));

  const RepairResult repaired = psd_repair(assemble_full_matrix(solved), options.repair);
  require_repaired(repaired);
  diag.repair_rounds = repaired.rounds;
  diag.repair_distance = repaired.frobenius_distance;
  diag.min_eigenvalue = repaired.min_eigenvalue;
  LaggedCorrelationSet gaussian_corr = to_lagged_set(repaired.matrix);
  VarModel var = yule_walker(gaussian_corr, options.innovations);

  return VstapModel{std::move(marginals), std::move(transforms), std::move(target),
                    std::move(gaussian_corr), std::move(var), std::move(diag)};
}

Series generate(const VstapModel& model, std::size_t N, std::uint64_t seed, TransformMode mode) {
  if (model.transforms.size() != model.K() || model.var.K() != model.K()) {
    throw Error(ErrorCode::InvalidInput, "generate: model components disagree on K");
  }
  Series x = simulate(model.var, N, seed);
  const auto K = static_cast<Eigen::Index>(model.K());
  const auto cols = static_cast<Eigen::Index>(N);
  for (Eigen::Index i = 0; i < K; ++i) {
    const auto& marginal = model.marginals[static_cast<std::size_t>(i)];
    if (mode == TransformMode::PiecewiseMarginal) {
      const auto& t = model.transforms[static_cast<std::size_t>(i)];
      for (Eigen::Index t_idx = 0; t_idx < cols; ++t_idx) x(i, t_idx) = t(x(i, t_idx));
      continue;
    }
    const double edge = 0.5 / static_cast<double>(marginal.size());
    for (Eigen::Index t_idx = 0; t_idx < cols; ++t_idx) {
      const double p = std::clamp(norm_cdf(x(i, t_idx)), edge, 1.0 - edge);
      x(i, t_idx) = empirical_quantile(marginal, p);
    }
    if (N == marginal.size()) {
      const auto row = row_vector(x, i);
      const auto remapped = rank_remap(ranks(row), marginal);
      for (Eigen::Index t_idx = 0; t_idx < cols; ++t_idx) {
        x(i, t_idx) = remapped[static_cast<std::size_t>(t_idx)];
      }
    }
  }
  return x;
}

Series surrogate_from_model(const VstapModel& model, std::uint64_t seed) {
  return generate(model, model.n(), seed, TransformMode::ExactMarginal);
}

Series surrogate(const Series& series, const FitOptions& options, std::uint64_t seed) {
  return surrogate_from_model(fit_vstap(series, options), seed);
}

std::pair<double, double> fisher_ci(double r, std::size_t N, double level) {
  if (!std::isfinite(r) || std::abs(r) > 1.0) {
    throw Error(ErrorCode::InvalidInput, "fisher_ci: r must lie in [-1,1]");
  }
  if (std::abs(r) == 1.0) throw Error(ErrorCode::DegenerateInput, "fisher_ci: |r| = 1");
  if (N <= 3) throw Error(ErrorCode::InvalidInput, "fisher_ci: need N > 3");
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::InvalidInput, "fisher_ci: level must lie in (0,1)");
  }
  const double z = norm_quantile(0.5 * (1.0 + level));
  const double half = z / std::sqrt(static_cast<double>(N) - 3.0);
  const double centre = std::atanh(r);
  return {std::tanh(centre - half), std::tanh(centre + half)};
}

}  // namespace vstap
