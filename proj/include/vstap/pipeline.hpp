// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vstap/bvn.hpp"
#include "vstap/error.hpp"
#include "vstap/lagcorr.hpp"
#include "vstap/marginal.hpp"
#include "vstap/solver.hpp"
#include "vstap/var.hpp"

namespace vstap {

enum class TransformMode {
  /// x = F^-1(Phi(z)) through the empirical quantile function.
  ExactMarginal,
  /// x = t(z) through the fitted piecewise transform.
  PiecewiseMarginal,
};

struct FitOptions {
  std::size_t order = 1;         // P
  std::size_t breakpoints = 20;  // m
  SolverOptions solver;
  RepairOptions repair;
  InnovationCovariance innovations = InnovationCovariance::Residual;
};

/// Outcome of one Gaussian correlation solve.
struct PairDiagnostic {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t lag = 0;
  double target = 0.0;
  FeasibleBounds bounds{-1.0, 1.0};
  double start = 0.0;  // naive correlation of the Gaussianized samples
  SolveReport report;
  double psi_at_solution = 0.0;
};

struct FitDiagnostics {
  std::vector<PairDiagnostic> pairs;
  int repair_rounds = 0;
  double repair_distance = 0.0;
  double min_eigenvalue = 0.0;
  std::size_t binary_searches = 0;
  std::size_t unconverged = 0;
};

struct VstapModel {
  std::vector<EmpiricalMarginal> marginals;
  std::vector<PiecewiseTransform> transforms;
  LaggedCorrelationSet target_corr;
  LaggedCorrelationSet gaussian_corr;
  VarModel var;
  FitDiagnostics diagnostics;

  std::size_t K() const noexcept { return marginals.size(); }
  std::size_t P() const noexcept { return var.P(); }
  /// Length of the series the model was fitted to.
  std::size_t n() const noexcept { return marginals.empty() ? 0 : marginals.front().size(); }
};

/// Thrown when one or more targets lie outside the range the transforms can
/// reach. Carries every offending solve, not just the first.
class InfeasibleTargets : public Error {
 public:
  explicit InfeasibleTargets(std::vector<PairDiagnostic> pairs);
  const std::vector<PairDiagnostic>& pairs() const noexcept { return pairs_; }

 private:
  std::vector<PairDiagnostic> pairs_;
};

/// Fits marginals, transforms, Gaussian lagged correlations (repaired to
/// positive definiteness if needed) and the VAR. Requires order >= 1 and
/// n > max(4(P+1), 2m).
VstapModel fit_vstap(const Series& series, const FitOptions& options);

/// Simulates the VAR and maps every channel to its marginal. In
/// ExactMarginal mode with N equal to the fitted length, each channel is
/// additionally rank-mapped onto the fitted sample, so it is a permutation
/// of it.
Series generate(const VstapModel& model, std::size_t N, std::uint64_t seed, TransformMode mode);

/// One realization of length n whose channels are permutations of the
/// fitted sample.
Series surrogate_from_model(const VstapModel& model, std::uint64_t seed);

Series surrogate(const Series& series, const FitOptions& options, std::uint64_t seed);

/// Fisher interval tanh(atanh(r) +- z / sqrt(N - 3)).
std::pair<double, double> fisher_ci(double r, std::size_t N, double level = 0.95);

}  // namespace vstap
