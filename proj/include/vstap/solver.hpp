// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string_view>

#include "vstap/bvn.hpp"
#include "vstap/marginal.hpp"

namespace vstap {

enum class SolveStatus { Converged, MaxIterations, Infeasible };

std::string_view to_string(SolveStatus status) noexcept;

struct SolveReport {
  double solution = 0.0;
  int iterations = 0;
  bool used_binary_search = false;
  double residual = 0.0;  // target - psi(solution)
  SolveStatus status = SolveStatus::MaxIterations;
};

struct SolverOptions {
  double epsilon = 1e-5;
  int max_iter = 200;
  // Above this |r| the local monotonicity of psi is checked every step.
  double monotonic_threshold = 0.9;
  double monotonic_step = 1e-3;
  // Iterates are kept inside [-rho_limit, rho_limit].
  double rho_limit = 0.99999;
};

/// Pearson correlation of two Gaussianized samples.
double naive_corr(std::span<const double> zi, std::span<const double> zj);

struct FeasibleBounds {
  double lower;
  double upper;
};

/// Correlations of the antitone (sorted vs reverse-sorted) and comonotone
/// (sorted vs sorted) pairings of the two samples.
FeasibleBounds feasible_bounds(std::span<const double> xi, std::span<const double> xj);

/// Finds r with psi(r) = target by the fixed-point update
/// r <- r + (target - psi(r)), switching to bisection against the threshold
/// when psi is found non-monotone beyond it.
SolveReport solve_gaussian_corr(const CorrelationMap& psi, double target, double start,
                                const SolverOptions& options = {});

/// Convenience overload binding the pair of transforms and their moments.
SolveReport solve_gaussian_corr(const PiecewiseTransform& ti, const PiecewiseTransform& tj,
                                double target, double start, const SolverOptions& options,
                                ChannelStats si, ChannelStats sj);

}  // namespace vstap
