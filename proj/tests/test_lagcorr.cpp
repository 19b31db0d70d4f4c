// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <random>
#include <vector>

#include <catch_amalgamated.hpp>

#include "support/systems.hpp"
#include "vstap/error.hpp"
#include "vstap/lagcorr.hpp"
#include "vstap/rng.hpp"

using namespace vstap;
using Catch::Matchers::WithinAbs;

namespace {

Series white_noise(Eigen::Index K, Eigen::Index n, std::uint64_t seed) {
  GaussianStream g(seed);
  Series s(K, n);
  for (Eigen::Index i = 0; i < K; ++i) {
    for (Eigen::Index t = 0; t < n; ++t) s(i, t) = g();
  }
  return s;
}

bool block_toeplitz(const FullCorrMatrix& m) {
  const auto K = static_cast<Eigen::Index>(m.K);
  const auto L = static_cast<Eigen::Index>(m.P) + 1;
  for (Eigen::Index u = 0; u < L; ++u) {
    for (Eigen::Index v = 0; v < L; ++v) {
      const Eigen::MatrixXd b = m.values.block(u * K, v * K, K, K);
      if (v >= u) {
        if (b != m.values.block(0, (v - u) * K, K, K)) return false;
      } else if (b != m.values.block(0, (u - v) * K, K, K).transpose()) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("lagged correlation estimates", "[lagcorr]") {
  const std::size_t n = 100000;
  const auto w = white_noise(3, static_cast<Eigen::Index>(n), 1);
  const auto r = estimate_lagged_correlations(w, 4);
  CHECK(r.at(0, 0, 0) == 1.0);
  // 36 entries are checked, so the bound is widened from 3 to 4 standard errors.
  for (std::size_t tau = 1; tau <= 4; ++tau) {
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(r.at(i, j, tau)) < 4.0 / std::sqrt(double(n)));
    }
  }

  // Scalar AR(1) with coefficient 0.5.
  GaussianStream g(2);
  Series ar(1, static_cast<Eigen::Index>(n));
  double z = 0.0;
  for (int t = -1000; t < static_cast<int>(n); ++t) {
    z = 0.5 * z + g();
    if (t >= 0) ar(0, t) = z;
  }
  const auto ra = estimate_lagged_correlations(ar, 2);
  CHECK_THAT(ra.at(0, 0, 1), WithinAbs(0.5, 0.01));
  CHECK_THAT(ra.at(0, 0, 2), WithinAbs(0.25, 0.01));
}

TEST_CASE("estimator matches an independent implementation", "[lagcorr]") {
  const auto s = testsupport::simulate_reference(testsupport::var22(), 2000, 3);
  const auto r = estimate_lagged_correlations(s, 3);
  for (std::size_t tau = 0; tau <= 3; ++tau) {
    for (Eigen::Index i = 0; i < 2; ++i) {
      for (Eigen::Index j = 0; j < 2; ++j) {
        CHECK_THAT(r.at(std::size_t(i), std::size_t(j), tau),
                   WithinAbs(testsupport::lag_corr(s, i, j, tau), 1e-12));
      }
    }
  }
}

TEST_CASE("estimator is invariant under positive affine maps", "[lagcorr][property]") {
  auto s = testsupport::simulate_reference(testsupport::var22(), 3000, 4);
  const auto r0 = estimate_lagged_correlations(s, 3);
  s.row(0) = (s.row(0).array() * 7.5 + 100.0).matrix();
  s.row(1) = (s.row(1).array() * 0.01 - 3.0).matrix();
  const auto r1 = estimate_lagged_correlations(s, 3);
  for (std::size_t tau = 0; tau <= 3; ++tau) {
    CHECK((r0.block(tau) - r1.block(tau)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("estimator input validation", "[lagcorr]") {
  Series s = white_noise(2, 50, 5);
  s.row(1).setConstant(3.0);
  CHECK_THROWS_AS(estimate_lagged_correlations(s, 1), Error);
  try {
    (void)estimate_lagged_correlations(s, 1);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
  CHECK_THROWS_AS(estimate_lagged_correlations(white_noise(1, 3, 6), 5), Error);
}

TEST_CASE("full matrix assembly", "[lagcorr]") {
  LaggedCorrelationSet s1(1, 1);
  s1.set(0, 0, 1, 0.5);
  Eigen::Matrix2d expect;
  expect << 1, 0.5, 0.5, 1;
  CHECK(assemble_full_matrix(s1).values == Eigen::MatrixXd(expect));

  LaggedCorrelationSet s0(2, 0);
  s0.set(0, 1, 0, 0.3);
  CHECK(assemble_full_matrix(s0).values == s0.block(0));

  Eigen::MatrixXd r0(2, 2), r1(2, 2);
  r0 << 1, 0.2, 0.2, 1;
  r1 << 0.5, 0.1, 0.3, 0.4;
  const auto set = LaggedCorrelationSet::from_blocks({r0, r1});
  const auto full = assemble_full_matrix(set);
  REQUIRE(full.values.rows() == 4);
  CHECK(full.values.block(0, 0, 2, 2) == r0);
  CHECK(full.values.block(0, 2, 2, 2) == r1);
  CHECK(full.values.block(2, 0, 2, 2) == Eigen::MatrixXd(r1.transpose()));
  CHECK(full.values.block(2, 2, 2, 2) == r0);

  const auto back = to_lagged_set(full);
  CHECK(back.block(1) == r1);
}

TEST_CASE("correlation set invariants", "[lagcorr]") {
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 0.2, 0.3, 1;
  CHECK_THROWS_AS(LaggedCorrelationSet::from_blocks({bad}), Error);
  LaggedCorrelationSet s(2, 1);
  CHECK_THROWS_AS(s.set(0, 1, 1, 1.5), Error);
  CHECK_THROWS_AS(s.at(2, 0, 0), Error);
  s.set(1, 0, 0, -0.25);
  CHECK(s.at(0, 1, 0) == -0.25);
}

TEST_CASE("repair leaves positive definite input untouched", "[lagcorr]") {
  const auto set = testsupport::theoretical_corr(testsupport::var22(), 3);
  const auto full = assemble_full_matrix(set);
  const auto rep = psd_repair(full);
  CHECK(rep.rounds == 0);
  CHECK(rep.converged);
  CHECK(rep.matrix.values == full.values);
  CHECK(rep.frobenius_distance == 0.0);
}

TEST_CASE("repair of the uniform triple", "[lagcorr]") {
  LaggedCorrelationSet s(3, 0);
  s.set(0, 1, 0, -0.4158);
  s.set(0, 2, 0, 0.2091);
  s.set(1, 2, 0, 0.8135);
  const auto rep = psd_repair(assemble_full_matrix(s));
  REQUIRE(rep.converged);
  const auto& m = rep.matrix.values;
  CHECK_THAT(m(0, 1), WithinAbs(-0.4122, 5e-3));
  CHECK_THAT(m(0, 2), WithinAbs(0.2062, 5e-3));
  CHECK_THAT(m(1, 2), WithinAbs(0.8065, 5e-3));
  CHECK(rep.frobenius_distance < 0.02);
  CHECK(min_eigenvalue(m) > 0.0);
}

TEST_CASE("repair of random structured indefinite matrices", "[lagcorr][property]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  int tested = 0;
  while (tested < 50) {
    LaggedCorrelationSet s(2, 2);
    for (std::size_t tau = 0; tau <= 2; ++tau) {
      for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
          if (tau == 0 && i >= j) continue;
          s.set(i, j, tau, u(rng));
        }
      }
    }
    const auto full = assemble_full_matrix(s);
    if (min_eigenvalue(full.values) > 0.0) continue;
    ++tested;
    const auto rep = psd_repair(full);
    REQUIRE(rep.converged);
    CHECK(rep.rounds <= 20);
    CHECK(min_eigenvalue(rep.matrix.values) > 0.0);
    CHECK(block_toeplitz(rep.matrix));
    for (Eigen::Index d = 0; d < rep.matrix.values.rows(); ++d) {
      CHECK_THAT(rep.matrix.values(d, d), WithinAbs(1.0, 1e-10));
    }
    const auto again = psd_repair(rep.matrix);
    CHECK(again.rounds == 0);
    CHECK(again.matrix.values == rep.matrix.values);
  }
}

TEST_CASE("repair reports failure when the budget is exhausted", "[lagcorr]") {
  LaggedCorrelationSet s(3, 0);
  s.set(0, 1, 0, 0.99);
  s.set(0, 2, 0, 0.99);
  s.set(1, 2, 0, -0.99);
  RepairOptions opt;
  opt.max_rounds = 0;
  const auto rep = psd_repair(assemble_full_matrix(s), opt);
  CHECK_FALSE(rep.converged);
  CHECK_THROWS_AS(require_repaired(rep), Error);
}
