// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace vstap {

/// Multichannel series: one row per channel, one column per time index.
using Series = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// r(i, j, tau) = Corr(X_{i,t}, X_{j,t-tau}) for tau = 0..P.
class LaggedCorrelationSet {
 public:
  LaggedCorrelationSet(std::size_t K, std::size_t P);

  /// Builds from blocks R(0..P); R(0) must be symmetric with unit diagonal.
  static LaggedCorrelationSet from_blocks(const std::vector<Eigen::MatrixXd>& blocks);

  std::size_t K() const noexcept { return K_; }
  std::size_t P() const noexcept { return P_; }

  double at(std::size_t i, std::size_t j, std::size_t tau) const;
  void set(std::size_t i, std::size_t j, std::size_t tau, double value);

  /// K x K block R(tau).
  Eigen::MatrixXd block(std::size_t tau) const;

  /// Throws InvalidInput if an invariant is broken.
  void validate() const;

 private:
  std::size_t index(std::size_t i, std::size_t j, std::size_t tau) const;

  std::size_t K_;
  std::size_t P_;
  std::vector<double> r_;
};

/// Symmetric K(P+1) x K(P+1) matrix whose (u, v) block is R(v - u).
struct FullCorrMatrix {
  std::size_t K = 0;
  std::size_t P = 0;
  Eigen::MatrixXd values;
};

/// Biased estimator: divisor n, full-sample means and standard deviations.
/// Requires n > 4(P+1); a constant channel throws DegenerateInput.
LaggedCorrelationSet estimate_lagged_correlations(const Series& series, std::size_t P);

FullCorrMatrix assemble_full_matrix(const LaggedCorrelationSet& set);

/// Reads R(0..P) back out of the first block row.
LaggedCorrelationSet to_lagged_set(const FullCorrMatrix& m);

struct RepairOptions {
  double floor = 1e-6;
  int max_rounds = 50;
};

struct RepairResult {
  FullCorrMatrix matrix;
  int rounds = 0;
  bool converged = false;
  double min_eigenvalue = 0.0;
  double frobenius_distance = 0.0;
};

/// Alternates eigenvalue clipping (followed by rescaling to unit diagonal)
/// with averaging over the block-Toeplitz pattern until the structured
/// matrix has min eigenvalue >= floor / 2. Returns the last iterate with
/// converged = false when max_rounds is exhausted; callers decide whether
/// that is fatal (see require_repaired).
RepairResult psd_repair(const FullCorrMatrix& m, const RepairOptions& options = {});

/// Throws RepairFailed when the result did not converge.
void require_repaired(const RepairResult& result);

double min_eigenvalue(const Eigen::MatrixXd& symmetric);

}  // namespace vstap
