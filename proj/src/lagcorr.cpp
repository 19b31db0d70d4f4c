// SPDX-License-Identifier: Apache-2.0
#include "vstap/lagcorr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "vstap/error.hpp"

namespace vstap {

LaggedCorrelationSet::LaggedCorrelationSet(std::size_t K, std::size_t P)
    : K_(K), P_(P), r_(K * K * (P + 1), 0.0) {
  if (K == 0) throw Error(ErrorCode::InvalidInput, "LaggedCorrelationSet: K must be >= 1");
  for (std::size_t i = 0; i < K; ++i) r_[index(i, i, 0)] = 1.0;
}

LaggedCorrelationSet LaggedCorrelationSet::from_blocks(const std::vector<Eigen::MatrixXd>& blocks) {
  if (blocks.empty()) throw Error(ErrorCode::InvalidInput, "from_blocks: no blocks given");
  const auto K = static_cast<std::size_t>(blocks.front().rows());
  LaggedCorrelationSet set(K, blocks.size() - 1);
  for (std::size_t tau = 0; tau < blocks.size(); ++tau) {
    const auto& b = blocks[tau];
    if (static_cast<std::size_t>(b.rows()) != K || static_cast<std::size_t>(b.cols()) != K) {
      throw Error(ErrorCode::InvalidInput, "from_blocks: blocks must all be K x K");
    }
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        set.r_[set.index(i, j, tau)] = b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  set.validate();
  return set;
}

std::size_t LaggedCorrelationSet::index(std::size_t i, std::size_t j, std::size_t tau) const {
  if (i >= K_ || j >= K_ || tau > P_) {
    throw Error(ErrorCode::InvalidInput, "LaggedCorrelationSet: index out of range");
  }
  return (tau * K_ + i) * K_ + j;
}

double LaggedCorrelationSet::at(std::size_t i, std::size_t j, std::size_t tau) const {
  return r_[index(i, j, tau)];
}

void LaggedCorrelationSet::set(std::size_t i, std::size_t j, std::size_t tau, double value) {
  if (!std::isfinite(value) || std::abs(value) > 1.0) {
    throw Error(ErrorCode::InvalidInput, "LaggedCorrelationSet: entries must lie in [-1,1]");
  }
  r_[index(i, j, tau)] = value;
  if (tau == 0) r_[index(j, i, 0)] = value;
}

Eigen::MatrixXd LaggedCorrelationSet::block(std::size_t tau) const {
  Eigen::MatrixXd b(K_, K_);
  for (std::size_t i = 0; i < K_; ++i) {
    for (std::size_t j = 0; j < K_; ++j) {
      b(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = at(i, j, tau);
    }
  }
  return b;
}

void LaggedCorrelationSet::validate() const {
  for (double v : r_) {
    if (!std::isfinite(v) || std::abs(v) > 1.0) {
      throw Error(ErrorCode::InvalidInput, "LaggedCorrelationSet: entries must lie in [-1,1]");
    }
  }
  for (std::size_t i = 0; i < K_; ++i) {
    if (at(i, i, 0) != 1.0) {
      throw Error(ErrorCode::InvalidInput, "LaggedCorrelationSet: R(0) must have unit diagonal");
    }
    for (std::size_t j = i + 1; j < K_; ++j) {
      if (std::abs(at(i, j, 0) - at(j, i, 0)) > 1e-12) {
        throw Error(ErrorCode::InvalidInput, "LaggedCorrelationSet: R(0) must be symmetric");
      }
    }
  }
}

LaggedCorrelationSet estimate_lagged_correlations(const Series& series, std::size_t P) {
  const auto K = static_cast<std::size_t>(series.rows());
  const auto n = static_cast<std::size_t>(series.cols());
  if (K == 0) throw Error(ErrorCode::InvalidInput, "estimate_lagged_correlations: no channels");
  if (n <= 4 * (P + 1)) {
    throw Error(ErrorCode::InsufficientData,
                "estimate_lagged_correlations: need n > 4(P+1) (n=" + std::to_string(n) +
                    ", P=" + std::to_string(P) + ")");
  }
  const double dn = static_cast<double>(n);
  Series centred(series.rows(), series.cols());
  std::vector<double> sd(K);
  for (std::size_t i = 0; i < K; ++i) {
    const auto row = series.row(static_cast<Eigen::Index>(i));
    if (!row.allFinite()) {
      throw Error(ErrorCode::InvalidInput,
                  "estimate_lagged_correlations: non-finite value in channel " + std::to_string(i));
    }
    centred.row(static_cast<Eigen::Index>(i)) = row.array() - row.mean();
    sd[i] = std::sqrt(centred.row(static_cast<Eigen::Index>(i)).squaredNorm() / dn);
    if (!(sd[i] > 0.0)) {
      throw Error(ErrorCode::DegenerateInput,
                  "estimate_lagged_correlations: channel " + std::to_string(i) + " is constant");
    }
  }

  LaggedCorrelationSet set(K, P);
  for (std::size_t tau = 0; tau <= P; ++tau) {
    const auto len = static_cast<Eigen::Index>(n - tau);
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        if (tau == 0 && j <= i) continue;
        const double s = centred.row(static_cast<Eigen::Index>(i))
                             .segment(static_cast<Eigen::Index>(tau), len)
                             .dot(centred.row(static_cast<Eigen::Index>(j)).segment(0, len));
        set.set(i, j, tau, std::clamp(s / dn / (sd[i] * sd[j]), -1.0, 1.0));
      }
    }
  }
  return set;
}

FullCorrMatrix assemble_full_matrix(const LaggedCorrelationSet& set) {
  const auto K = static_cast<Eigen::Index>(set.K());
  const auto blocks = static_cast<Eigen::Index>(set.P() + 1);
  FullCorrMatrix m{set.K(), set.P(), Eigen::MatrixXd(K * blocks, K * blocks)};
  for (Eigen::Index tau = 0; tau < blocks; ++tau) {
    const Eigen::MatrixXd b = set.block(static_cast<std::size_t>(tau));
    for (Eigen::Index u = 0; u + tau < blocks; ++u) {
      m.values.block(u * K, (u + tau) * K, K, K) = b;
      m.values.block((u + tau) * K, u * K, K, K) = b.transpose();
    }
  }
  return m;
}

LaggedCorrelationSet to_lagged_set(const FullCorrMatrix& m) {
  const auto K = static_cast<Eigen::Index>(m.K);
  if (m.values.rows() != K * static_cast<Eigen::Index>(m.P + 1) ||
      m.values.cols() != m.values.rows()) {
    throw Error(ErrorCode::InvalidInput, "to_lagged_set: matrix size does not match K(P+1)");
  }
  std::vector<Eigen::MatrixXd> blocks;
  for (std::size_t tau = 0; tau <= m.P; ++tau) {
    blocks.emplace_back(m.values.block(0, static_cast<Eigen::Index>(tau) * K, K, K));
  }
  return LaggedCorrelationSet::from_blocks(blocks);
}

double min_eigenvalue(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericallySingular, "min_eigenvalue: eigendecomposition failed");
  }
  return es.eigenvalues().minCoeff();
}

namespace {

Eigen::MatrixXd clip_and_rescale(const Eigen::MatrixXd& m, double floor) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NumericallySingular, "psd_repair: eigendecomposition failed");
  }
  const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(floor);
  const Eigen::MatrixXd& V = es.eigenvectors();
  Eigen::MatrixXd out = V * lambda.asDiagonal() * V.transpose();
  const Eigen::VectorXd scale = out.diagonal().cwiseSqrt().cwiseInverse();
  return scale.asDiagonal() * out * scale.asDiagonal();
}

// Averages every entry that the block-Toeplitz pattern forces to be equal.
FullCorrMatrix restore_structure(const Eigen::MatrixXd& m, std::size_t K, std::size_t P) {
  const std::size_t cells = K * K * (P + 1);
  std::vector<double> sum(cells, 0.0);
  std::vector<double> count(cells, 0.0);
  auto key = [K](std::size_t i, std::size_t j, std::size_t tau) { return (tau * K + i) * K + j; };
  const std::size_t dim = K * (P + 1);
  for (std::size_t row = 0; row < dim; ++row) {
    for (std::size_t col = 0; col < dim; ++col) {
      const std::size_t u = row / K, a = row % K;
      const std::size_t v = col / K, b = col % K;
      std::size_t k;
      if (v > u) {
        k = key(a, b, v - u);
      } else if (v < u) {
        k = key(b, a, u - v);
      } else {
        k = key(std::min(a, b), std::max(a, b), 0);
      }
      sum[k] += m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
      count[k] += 1.0;
    }
  }
  LaggedCorrelationSet set(K, P);
  for (std::size_t tau = 0; tau <= P; ++tau) {
    for (std::size_t i = 0; i < K; ++i) {
      for (std::size_t j = 0; j < K; ++j) {
        if (tau == 0 && j <= i) continue;
        const std::size_t k = key(i, j, tau);
        set.set(i, j, tau, std::clamp(sum[k] / count[k], -1.0, 1.0));
      }
    }
  }
  return assemble_full_matrix(set);
}

}  // namespace

RepairResult psd_repair(const FullCorrMatrix& m, const RepairOptions& options) {
  const auto dim = static_cast<Eigen::Index>(m.K * (m.P + 1));
  if (m.values.rows() != dim || m.values.cols() != dim) {
    throw Error(ErrorCode::InvalidInput, "psd_repair: matrix size does not match K(P+1)");
  }
  if (!(options.floor > 0.0) || options.max_rounds < 0) {
    throw Error(ErrorCode::InvalidInput, "psd_repair: floor must be positive");
  }
  if (!m.values.isApprox(m.values.transpose(), 1e-12) ||
      (m.values.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::InvalidInput, "psd_repair: input must be symmetric with unit diagonal");
  }

  RepairResult result;
  result.matrix = m;
  result.min_eigenvalue = min_eigenvalue(m.values);
  const double target = 0.5 * options.floor;
  while (result.min_eigenvalue < target && result.rounds < options.max_rounds) {
    const Eigen::MatrixXd clipped = clip_and_rescale(result.matrix.values, options.floor);
    result.matrix = restore_structure(clipped, m.K, m.P);
    result.min_eigenvalue = min_eigenvalue(result.matrix.values);
    ++result.rounds;
  }
  result.converged = result.min_eigenvalue >= target;
  result.frobenius_distance = (result.matrix.values - m.values).norm();
  return result;
}

void require_repaired(const RepairResult& result) {
  if (!result.converged) {
    throw Error(ErrorCode::RepairFailed,
                "psd_repair: no positive definite structured matrix after " +
                    std::to_string(result.rounds) + " rounds (min eigenvalue " +
                    std::to_string(result.min_eigenvalue) + ")");
  }
}

}  // namespace vstap
