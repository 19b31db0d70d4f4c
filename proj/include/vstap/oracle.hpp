// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include "vstap/bvn.hpp"

namespace vstap {

using ScalarMap = std::function<double(double)>;

struct McCorrelation {
  double value = 0.0;
  /// sqrt((1 - r^2)^2 / samples), exact only for Gaussian pairs.
  double std_error = 0.0;
  /// Spread of the estimate across 20 equal batches, divided by sqrt(20).
  /// Tracks heavy-tailed maps, where std_error is too optimistic.
  double batch_std_error = 0.0;
};

/// Pearson correlation of (fi(Z1), fj(Z2)) over `samples` standard Gaussian
/// pairs at correlation rho. Requires samples >= 10^4.
McCorrelation mc_psi(const ScalarMap& fi, const ScalarMap& fj, double rho, std::size_t samples,
                     std::uint64_t seed);

struct McTruncMoments {
  double p = 0.0;
  double mu10 = 0.0;
  double mu01 = 0.0;
  double mu11 = 0.0;
  double se_p = 0.0;
  double se_mu10 = 0.0;
  double se_mu01 = 0.0;
  double se_mu11 = 0.0;
  std::size_t accepted = 0;
};

/// Rejection sampling of the standard bivariate normal into r. Requires
/// samples >= 10^5; fewer than 100 accepted draws throws
/// InsufficientAcceptance.
McTruncMoments mc_trunc_moments(const Rect& r, double rho, std::size_t samples,
                                std::uint64_t seed);

}  // namespace vstap
