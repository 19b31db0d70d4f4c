// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <vector>

#include <catch_amalgamated.hpp>

#include "support/systems.hpp"
#include "vstap/error.hpp"
#include "vstap/lagcorr.hpp"
#include "vstap/var.hpp"

using namespace vstap;
using Catch::Matchers::WithinAbs;

namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

double max_abs_diff(const std::vector<Eigen::MatrixXd>& a, const std::vector<Eigen::MatrixXd>& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, (a[k] - b[k]).cwiseAbs().maxCoeff());
  return worst;
}

}  // namespace

TEST_CASE("scalar AR(1) from its lag-one correlation", "[var]") {
  LaggedCorrelationSet s(1, 1);
  s.set(0, 0, 1, 0.5);
  const auto m = yule_walker(s);
  CHECK_THAT(m.A()[0](0, 0), WithinAbs(0.5, 1e-15));
  CHECK_THAT(m.sigma_e()(0, 0), WithinAbs(0.75, 1e-15));
  const auto u = yule_walker(s, InnovationCovariance::Unit);
  CHECK(u.sigma_e()(0, 0) == 1.0);
}

TEST_CASE("scalar AR(2) round trip", "[var]") {
  // Forward: r1 = phi1 / (1 - phi2), r2 = phi1 r1 + phi2.
  const double phi1 = 0.6, phi2 = -0.3;
  const double r1 = phi1 / (1 - phi2);
  const double r2 = phi1 * r1 + phi2;
  LaggedCorrelationSet s(1, 2);
  s.set(0, 0, 1, r1);
  s.set(0, 0, 2, r2);
  const auto m = yule_walker(s);
  CHECK_THAT(m.A()[0](0, 0), WithinAbs(phi1, 1e-10));
  CHECK_THAT(m.A()[1](0, 0), WithinAbs(phi2, 1e-10));
}

TEST_CASE("two-channel order-two system round trip", "[var]") {
  const auto sys = testsupport::var22();
  const auto m = yule_walker(testsupport::theoretical_corr(sys, 2));
  CHECK(max_abs_diff(m.A(), testsupport::standardized_coefficients(sys)) < 1e-8);
  // Unit-variance output: R(0) reproduced by the fitted system.
  const auto back = testsupport::theoretical_corr({Eigen::VectorXd::Zero(2), m.A(), m.sigma_e()}, 2);
  const auto ref = testsupport::theoretical_corr(sys, 2);
  for (std::size_t tau = 0; tau <= 2; ++tau) {
    CHECK((back.block(tau) - ref.block(tau)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("random stationary systems round trip", "[var][property]") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const std::size_t K = 1 + seed % 4, P = 1 + seed % 3;
    const auto sys = testsupport::random_stationary(K, P, 0.9, seed);
    const auto m = yule_walker(testsupport::theoretical_corr(sys, P));
    INFO("seed=" << seed << " K=" << K << " P=" << P);
    CHECK(max_abs_diff(m.A(), testsupport::standardized_coefficients(sys)) < 1e-8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.sigma_e());
    CHECK(es.eigenvalues().minCoeff() >= -1e-10);
  }
}

TEST_CASE("stationarity check", "[var]") {
  const std::vector<Eigen::MatrixXd> a{scalar(0.5)};
  const auto r = stationarity_check(a);
  CHECK(r.stationary);
  CHECK_THAT(r.spectral_radius, WithinAbs(0.5, 1e-14));
  const std::vector<Eigen::MatrixXd> b{scalar(1.1)};
  const auto rb = stationarity_check(b);
  CHECK_FALSE(rb.stationary);
  CHECK_THAT(rb.spectral_radius, WithinAbs(1.1, 1e-14));
  const auto sys = testsupport::var22();
  const auto rs = stationarity_check(sys.A);
  CHECK(rs.stationary);
  CHECK_THAT(rs.spectral_radius, WithinAbs(testsupport::companion_radius(sys.A), 1e-12));

  try {
    VarModel bad(b, scalar(1.0));
    FAIL("expected NonStationary");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonStationary);
  }
}

TEST_CASE("singular correlation system", "[var]") {
  LaggedCorrelationSet s(2, 1);
  s.set(0, 1, 0, 1.0);
  try {
    (void)yule_walker(s);
    FAIL("expected NumericallySingular");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NumericallySingular);
  }
}

TEST_CASE("simulation", "[var]") {
  const VarModel white({scalar(0.0)}, scalar(1.0));
  const std::size_t N = 200000;
  const auto x = simulate(white, N, 9);
  const double mean = x.row(0).mean();
  const double var = (x.row(0).array() - mean).square().sum() / double(N);
  CHECK_THAT(var, WithinAbs(1.0, 3 * std::sqrt(2.0 / double(N))));

  const auto again = simulate(white, N, 9);
  CHECK(again == x);
  CHECK_FALSE(simulate(white, 100, 10) == simulate(white, 100, 11));
  CHECK(default_burn_in(1) == 1000);
  CHECK(default_burn_in(40) == 2000);
}

TEST_CASE("simulated system matches its theoretical correlations", "[var]") {
  const auto sys = testsupport::var22();
  const auto ref = testsupport::theoretical_corr(sys, 1);
  const auto m = yule_walker(ref);
  const std::size_t N = 100000;
  const auto x = simulate(m, N, 12);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const double mean = x.row(i).mean();
    CHECK_THAT((x.row(i).array() - mean).square().mean(), WithinAbs(1.0, 0.03));
    for (Eigen::Index j = 0; j < 2; ++j) {
      CHECK_THAT(testsupport::lag_corr(x, i, j, 1), WithinAbs(ref.at(std::size_t(i), std::size_t(j), 1), 0.01));
    }
  }
}
