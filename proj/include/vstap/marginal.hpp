// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vstap {

/// Sorted sample of one channel, with plotting-position CDF (i - 0.5)/n and
/// its clamped, linearly interpolated inverse.
class EmpiricalMarginal {
 public:
  /// Copies and sorts `sample`. Requires n >= 2 and finite values.
  explicit EmpiricalMarginal(std::span<const double> sample);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double min() const noexcept { return values_.front(); }
  double max() const noexcept { return values_.back(); }
  double mean() const noexcept { return mean_; }
  /// Sample standard deviation with divisor n - 1.
  double sd() const noexcept { return sd_; }

 private:
  std::vector<double> values_;
  double mean_ = 0.0;
  double sd_ = 0.0;
};

/// Plotting-position probability of x. Tied order statistics share their
/// averaged rank; values between order statistics are interpolated and the
/// result is clamped to [0.5/n, 1 - 0.5/n].
double empirical_cdf(const EmpiricalMarginal& marginal, double x);

/// Inverse of empirical_cdf for p in (0,1), clamped to [min, max].
double empirical_quantile(const EmpiricalMarginal& marginal, double p);

/// Phi^-1(empirical_cdf(x)) for every element of `sample`.
std::vector<double> gaussianize(const EmpiricalMarginal& marginal,
                                std::span<const double> sample);

/// Breakpoints Phi^-1(k/m), k = 1..m-1.
std::vector<double> equiprobable_breakpoints(std::size_t m);

/// Monotone piecewise-linear map from the standard Gaussian axis to a target
/// marginal. Segment k covers (a_{k-1}, a_k]; the outer segments extend to
/// -inf and +inf.
class PiecewiseTransform {
 public:
  struct Segment {
    double intercept = 0.0;
    double slope = 0.0;
  };

  /// segments.size() must equal breakpoints.size() + 1. Breakpoints strictly
  /// increasing, coefficients finite, slopes non-negative.
  PiecewiseTransform(std::vector<double> breakpoints, std::vector<Segment> segments);

  /// The same line on every one of m equiprobable segments.
  static PiecewiseTransform affine(std::size_t m, double intercept, double slope);

  double operator()(double z) const noexcept;

  std::size_t segment_count() const noexcept { return segments_.size(); }
  std::size_t segment_of(double z) const noexcept;
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const Segment> segments() const noexcept { return segments_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<Segment> segments_;
};

/// Evaluates t at z.
inline double apply_transform(const PiecewiseTransform& t, double z) noexcept { return t(z); }

/// Least-squares line per equiprobable segment through (Phi^-1(F(x)), x).
/// Requires m >= 2 and n >= 2m; negative slopes are clamped to zero and any
/// downward step at a breakpoint is removed by an isotonic adjustment of the
/// segment end values.
PiecewiseTransform fit_piecewise(const EmpiricalMarginal& marginal, std::size_t m);

/// 0-based ordinal ranks; ties are broken by position.
std::vector<std::size_t> ranks(std::span<const double> series);

/// Reorders the sorted values of `target` so that element t has rank
/// source_ranks[t] (0-based).
std::vector<double> rank_remap(std::span<const std::size_t> source_ranks,
                               const EmpiricalMarginal& target);

}  // namespace vstap
