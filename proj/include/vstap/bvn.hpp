// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "vstap/marginal.hpp"

namespace vstap {

/// Axis-aligned rectangle on the standard bivariate Gaussian plane. Bounds may
/// be infinite; lower bounds must be strictly below upper bounds.
struct Rect {
  double z1_lo;
  double z1_hi;
  double z2_lo;
  double z2_hi;
};

/// P(Z1 > h, Z2 > k) for the standard bivariate normal with correlation rho.
/// Gauss-Legendre quadrature over the correlation (Drezner-Wesolowsky as
/// refined by Genz), absolute error around 1e-15.
double bvn_upper_orthant(double h, double k, double rho);

/// Probability mass of r. |rho| >= 1 throws InvalidInput.
double bvn_rect_prob(const Rect& r, double rho);

/// 1 - Phi((b - rho a) / sqrt(1 - rho^2)), with the infinite cases resolved
/// explicitly.
double q_integral(double a, double b, double rho);

/// Conditional moments of the bivariate standard normal truncated to a
/// rectangle.
struct TruncMoments {
  double p;     // rectangle probability
  double mu10;  // E(Z1 | r)
  double mu01;  // E(Z2 | r)
  double mu11;  // E(Z1 Z2 | r)
};

/// Unnormalized counterparts: E(Z1 1_r), E(Z2 1_r), E(Z1 Z2 1_r).
struct PartialMoments {
  double p;
  double m10;
  double m01;
  double m11;
};

PartialMoments rect_partial_moments(const Rect& r, double rho);

/// Throws DegenerateRegion when the rectangle carries no probability.
TruncMoments trunc_moments(const Rect& r, double rho);

/// Location and scale used to standardize a transform in psi_eval.
struct ChannelStats {
  double mean = 0.0;
  double sd = 1.0;
};

/// Mean and standard deviation of t(Z) for Z ~ N(0,1), in closed form.
ChannelStats implied_moments(const PiecewiseTransform& t);

/// Correlation transform for one pair of piecewise maps: rho_z maps to
/// (E[Xi Xj] - mean_i mean_j) / (sd_i sd_j), the product moment being the
/// m x m sum over segment rectangles. The transforms must share breakpoints.
/// Corner quantities are precomputed per call, so one instance can be
/// evaluated repeatedly by the solver.
class CorrelationMap {
 public:
  CorrelationMap(const PiecewiseTransform& ti, const PiecewiseTransform& tj,
                 ChannelStats si, ChannelStats sj);

  /// Uses implied_moments of each transform.
  CorrelationMap(const PiecewiseTransform& ti, const PiecewiseTransform& tj);

  /// Clamped to [-1, 1]. |rho_z| >= 1 throws InvalidInput.
  double operator()(double rho_z) const;

  /// Unclamped E[Xi Xj] at rho_z.
  double product_moment(double rho_z) const;

 private:
  double centred_moment(double rho_z) const;

  const PiecewiseTransform* ti_;
  const PiecewiseTransform* tj_;
  ChannelStats si_;
  ChannelStats sj_;
  ChannelStats implied_i_;
  ChannelStats implied_j_;
  std::vector<double> grid_;  // -inf, breakpoints..., +inf
};

double psi_eval(const PiecewiseTransform& ti, const PiecewiseTransform& tj, double rho_z,
                ChannelStats si, ChannelStats sj);

}  // namespace vstap
