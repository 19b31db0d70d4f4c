// SPDX-License-Identifier: Apache-2.0
#include "vstap/var.hpp"

#include <algorithm>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "vstap/error.hpp"
#include "vstap/rng.hpp"

namespace vstap {

StationarityResult stationarity_check(std::span<const Eigen::MatrixXd> A) {
  if (A.empty()) return {true, 0.0};
  const Eigen::Index K = A.front().rows();
  const auto P = static_cast<Eigen::Index>(A.size());
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(K * P, K * P);
  for (Eigen::Index k = 0; k < P; ++k) {
    companion.block(0, k * K, K, K) = A[static_cast<std::size_t>(k)];
  }
  if (P > 1) companion.block(K, 0, K * (P - 1), K * (P - 1)).setIdentity();
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericallySingular, "stationarity_check: eigensolver failed");
  }
  const double radius = es.eigenvalues().cwiseAbs().maxCoeff();
  return {radius < 1.0, radius};
}

VarModel::VarModel(std::vector<Eigen::MatrixXd> A, Eigen::MatrixXd sigma_e)
    : A_(std::move(A)), sigma_e_(std::move(sigma_e)) {
  const Eigen::Index K = sigma_e_.rows();
  if (A_.empty() || K == 0 || sigma_e_.cols() != K) {
    throw Error(ErrorCode::InvalidInput, "VarModel: need P >= 1 and a square innovation covariance");
  }
  for (const auto& a : A_) {
    if (a.rows() != K || a.cols() != K || !a.allFinite()) {
      throw Error(ErrorCode::InvalidInput, "VarModel: coefficient matrices must be finite K x K");
    }
  }
  if (!sigma_e_.allFinite() || !sigma_e_.isApprox(sigma_e_.transpose(), 1e-10)) {
    throw Error(ErrorCode::InvalidInput, "VarModel: innovation covariance must be symmetric");
  }
  sigma_e_ = 0.5 * (sigma_e_ + sigma_e_.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma_e_, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw Error(ErrorCode::InvalidInput, "VarModel: innovation covariance is not PSD");
  }
  const auto check = stationarity_check(A_);
  spectral_radius_ = check.spectral_radius;
  if (!check.stationary) {
    throw Error(ErrorCode::NonStationary,
                "VarModel: companion spectral radius " + std::to_string(spectral_radius_) + " >= 1");
  }
}

VarModel yule_walker(const LaggedCorrelationSet& set, InnovationCovariance innovations) {
  const std::size_t P = set.P();
  if (P == 0) throw Error(ErrorCode::InvalidInput, "yule_walker: order P must be >= 1");
  const auto K = static_cast<Eigen::Index>(set.K());
  const auto KP = K * static_cast<Eigen::Index>(P);

  const FullCorrMatrix full = assemble_full_matrix(set);
  const Eigen::MatrixXd G = full.values.topLeftCorner(KP, KP);
  // Right-hand side [R(1) ... R(P)], transposed for the symmetric solve.
  const Eigen::MatrixXd rhs = full.values.block(0, K, K, KP).transpose();

  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericallySingular,
                "yule_walker: lagged correlation matrix is not positive definite");
  }
  const Eigen::MatrixXd coeffs = llt.solve(rhs).transpose();  // [A_1 ... A_P]
  if (!coeffs.allFinite()) {
    throw Error(ErrorCode::NumericallySingular, "yule_walker: solution is not finite");
  }

  std::vector<Eigen::MatrixXd> A;
  Eigen::MatrixXd sigma = set.block(0);
  for (std::size_t k = 0; k < P; ++k) {
    A.emplace_back(coeffs.block(0, static_cast<Eigen::Index>(k) * K, K, K));
    sigma -= A.back() * set.block(k + 1).transpose();
  }
  if (innovations == InnovationCovariance::Unit) {
    sigma = Eigen::MatrixXd::Identity(K, K);
  } else {
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(0.0);
    sigma = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
    sigma = 0.5 * (sigma + sigma.transpose()).eval();
  }
  return VarModel(std::move(A), std::move(sigma));
}

std::size_t default_burn_in(std::size_t P) noexcept { return std::max<std::size_t>(1000, 50 * P); }

namespace {

Eigen::MatrixXd innovation_factor(const Eigen::MatrixXd& sigma) {
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.asDiagonal();
}

}  // namespace

Series simulate(const VarModel& model, std::size_t N, std::uint64_t seed,
                std::optional<std::size_t> burn_in) {
  if (N == 0) throw Error(ErrorCode::InvalidInput, "simulate: N must be >= 1");
  const auto K = static_cast<Eigen::Index>(model.K());
  const std::size_t P = model.P();
  const std::size_t burn = burn_in.value_or(default_burn_in(P));
  const std::size_t total = burn + N;

  const Eigen::MatrixXd L = innovation_factor(model.sigma_e());
  GaussianStream gauss(seed);
  // Column-major history: column t is the state at time t.
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(K, static_cast<Eigen::Index>(total));
  Eigen::VectorXd eps(K);
  for (std::size_t t = 0; t < total; ++t) {
    for (Eigen::Index i = 0; i < K; ++i) eps(i) = gauss();
    Eigen::VectorXd next = L * eps;
    for (std::size_t k = 1; k <= P && k <= t; ++k) {
      next.noalias() += model.A()[k - 1] * z.col(static_cast<Eigen::Index>(t - k));
    }
    z.col(static_cast<Eigen::Index>(t)) = next;
  }
  return z.rightCols(static_cast<Eigen::Index>(N));
}

}  // namespace vstap
