// SPDX-License-Identifier: Apache-2.0
#pragma once

// Scalar standard-Gaussian functions shared by the marginal and bvn modules.

namespace vstap {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;
inline constexpr double kPi = 3.14159265358979323846;

/// Standard normal density.
double norm_pdf(double x) noexcept;

/// Standard normal CDF. Exact 0/1 at the infinities.
double norm_cdf(double x) noexcept;

/// Upper tail 1 - Phi(x), computed without cancellation for large x.
double norm_sf(double x) noexcept;

/// Inverse of norm_cdf. Returns -inf/+inf at p = 0/1; p outside [0,1]
/// throws InvalidInput.
double norm_quantile(double p);

/// Density of the standard bivariate normal with correlation rho, |rho| < 1.
double bvn_pdf(double x, double y, double rho) noexcept;

}  // namespace vstap
