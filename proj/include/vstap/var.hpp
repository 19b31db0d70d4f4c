// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "vstap/lagcorr.hpp"

namespace vstap {

struct StationarityResult {
  bool stationary = false;
  double spectral_radius = 0.0;
};

/// Spectral radius of the KP x KP companion matrix of A_1..A_P.
StationarityResult stationarity_check(std::span<const Eigen::MatrixXd> A);

/// Z_t = A_1 Z_{t-1} + ... + A_P Z_{t-P} + e_t with e_t ~ N(0, sigma_e).
/// Immutable; construction throws NonStationary unless the spectral radius
/// is below one.
class VarModel {
 public:
  VarModel(std::vector<Eigen::MatrixXd> A, Eigen::MatrixXd sigma_e);

  std::size_t K() const noexcept { return static_cast<std::size_t>(sigma_e_.rows()); }
  std::size_t P() const noexcept { return A_.size(); }
  const std::vector<Eigen::MatrixXd>& A() const noexcept { return A_; }
  const Eigen::MatrixXd& sigma_e() const noexcept { return sigma_e_; }
  double spectral_radius() const noexcept { return spectral_radius_; }

 private:
  std::vector<Eigen::MatrixXd> A_;
  Eigen::MatrixXd sigma_e_;
  double spectral_radius_ = 0.0;
};

enum class InnovationCovariance {
  /// R(0) - sum_k A_k R(k)^T, giving unit-variance output.
  Residual,
  /// Identity, whatever the correlations imply.
  Unit,
};

/// Multivariate Yule-Walker fit from lagged correlations R(0..P), P >= 1.
/// The KP x KP system matrix must be positive definite (NumericallySingular
/// otherwise); a non-stationary solution throws NonStationary.
VarModel yule_walker(const LaggedCorrelationSet& set,
                     InnovationCovariance innovations = InnovationCovariance::Residual);

/// max(1000, 50 P)
std::size_t default_burn_in(std::size_t P) noexcept;

/// K x N realization started from zero states; the first burn_in steps are
/// discarded. Bit-for-bit reproducible for a given (model, N, seed, burn_in).
Series simulate(const VarModel& model, std::size_t N, std::uint64_t seed,
                std::optional<std::size_t> burn_in = std::nullopt);

}  // namespace vstap
