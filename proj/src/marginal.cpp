// SPDX-License-Identifier: Apache-2.0
#include "vstap/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vstap/error.hpp"
#include "vstap/normal.hpp"

namespace vstap {

namespace {

// Averaged 1-based rank of the tie group occupying [first, last).
double group_rank(std::size_t first, std::size_t last) {
  return 0.5 * static_cast<double>(first + 1 + last);
}

// Least-squares non-decreasing fit to v by pooling adjacent violators.
void pool_adjacent_violators(std::vector<double>& v) {
  std::vector<double> level;
  std::vector<std::size_t> width;
  for (double x : v) {
    level.push_back(x);
    width.push_back(1);
    while (level.size() > 1 && level[level.size() - 2] > level.back()) {
      const std::size_t w = width.back() + width[width.size() - 2];
      const double merged = (level.back() * static_cast<double>(width.back()) +
                             level[level.size() - 2] * static_cast<double>(width[width.size() - 2])) /
                            static_cast<double>(w);
      level.pop_back();
      width.pop_back();
      level.back() = merged;
      width.back() = w;
    }
  }
  std::size_t out = 0;
  for (std::size_t b = 0; b < level.size(); ++b) {
    for (std::size_t i = 0; i < width[b]; ++i) v[out++] = level[b];
  }
}

// Independent segment lines can step down at a breakpoint. Interior end
// values (l_1, r_1, ..., r_{m-2}) are made non-decreasing and the lines are
// rebuilt from them; the two tail lines keep their slopes and are shifted to
// meet the interior, since their inner ends are the least accurate part of
// the fit. An already monotone fit is left untouched.
void enforce_monotone(std::span<const double> a, std::vector<PiecewiseTransform::Segment>& seg) {
  const std::size_t m = seg.size();
  auto at = [&](std::size_t k, double z) { return seg[k].intercept + seg[k].slope * z; };
  bool violated = false;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    if (at(k + 1, a[k]) < at(k, a[k])) violated = true;
  }
  if (!violated) return;

  if (m > 2) {
    std::vector<double> ends;
    for (std::size_t k = 1; k + 1 < m; ++k) {
      ends.push_back(at(k, a[k - 1]));
      ends.push_back(at(k, a[k]));
    }
    pool_adjacent_violators(ends);
    for (std::size_t k = 1; k + 1 < m; ++k) {
      const double lo = ends[2 * k - 2];
      const double hi = ends[2 * k - 1];
      const double slope = std::max(0.0, (hi - lo) / (a[k] - a[k - 1]));
      seg[k] = {lo - slope * a[k - 1], slope};
    }
  }
  const double first = at(1, a[0]);
  if (at(0, a[0]) > first) seg[0].intercept = first - seg[0].slope * a[0];
  const double last = at(m - 2, a[m - 2]);
  if (at(m - 1, a[m - 2]) < last) seg[m - 1].intercept = last - seg[m - 1].slope * a[m - 2];
}

}  // namespace

EmpiricalMarginal::EmpiricalMarginal(std::span<const double> sample)
    : values_(sample.begin(), sample.end()) {
  if (values_.size() < 2) {
    throw Error(ErrorCode::InsufficientData, "EmpiricalMarginal: need at least 2 values");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidInput, "EmpiricalMarginal: non-finite value in sample");
    }
  }
  std::sort(values_.begin(), values_.end());
  const double n = static_cast<double>(values_.size());
  mean_ = std::accumulate(values_.begin(), values_.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values_) ss += (v - mean_) * (v - mean_);
  sd_ = std::sqrt(ss / (n - 1.0));
}

double empirical_cdf(const EmpiricalMarginal& marginal, double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::InvalidInput, "empirical_cdf: non-finite argument");
  }
  const auto v = marginal.values();
  const std::size_t n = v.size();
  const double dn = static_cast<double>(n);
  const auto lo = static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), x) - v.begin());
  const auto hi = static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), x) - v.begin());
  if (lo < hi) return (group_rank(lo, hi) - 0.5) / dn;
  if (lo == 0) return 0.5 / dn;
  if (lo == n) return 1.0 - 0.5 / dn;

  const double left = v[lo - 1];
  const double right = v[lo];
  const auto left_first =
      static_cast<std::size_t>(std::lower_bound(v.begin(), v.end(), left) - v.begin());
  const auto right_last =
      static_cast<std::size_t>(std::upper_bound(v.begin(), v.end(), right) - v.begin());
  const double p_left = (group_rank(left_first, lo) - 0.5) / dn;
  const double p_right = (group_rank(lo, right_last) - 0.5) / dn;
  const double w = (x - left) / (right - left);
  return p_left + w * (p_right - p_left);
}

double empirical_quantile(const EmpiricalMarginal& marginal, double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::InvalidInput,
                "empirical_quantile: probability must lie in (0,1), got " + std::to_string(p));
  }
  const auto v = marginal.values();
  const double pos = static_cast<double>(v.size()) * p - 0.5;
  if (pos <= 0.0) return v.front();
  const double last = static_cast<double>(v.size() - 1);
  if (pos >= last) return v.back();
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const double w = pos - static_cast<double>(i);
  if (w == 0.0) return v[i];
  return v[i] + w * (v[i + 1] - v[i]);
}

std::vector<double> gaussianize(const EmpiricalMarginal& marginal, std::span<const double> sample) {
  std::vector<double> z(sample.size());
  std::transform(sample.begin(), sample.end(), z.begin(),
                 [&](double x) { return norm_quantile(empirical_cdf(marginal, x)); });
  return z;
}

std::vector<double> equiprobable_breakpoints(std::size_t m) {
  if (m == 0) throw Error(ErrorCode::InvalidInput, "equiprobable_breakpoints: m must be >= 1");
  std::vector<double> a(m - 1);
  for (std::size_t k = 1; k < m; ++k) {
    a[k - 1] = norm_quantile(static_cast<double>(k) / static_cast<double>(m));
  }
  return a;
}

PiecewiseTransform::PiecewiseTransform(std::vector<double> breakpoints,
                                       std::vector<Segment> segments)
    : breakpoints_(std::move(breakpoints)), segments_(std::move(segments)) {
  if (segments_.size() != breakpoints_.size() + 1) {
    throw Error(ErrorCode::InvalidInput,
                "PiecewiseTransform: need exactly one more segment than breakpoints");
  }
  for (std::size_t k = 0; k < breakpoints_.size(); ++k) {
    if (!std::isfinite(breakpoints_[k]) || (k > 0 && !(breakpoints_[k] > breakpoints_[k - 1]))) {
      throw Error(ErrorCode::InvalidInput,
                  "PiecewiseTransform: breakpoints must be finite and strictly increasing");
    }
  }
  for (const auto& s : segments_) {
    if (!std::isfinite(s.intercept) || !std::isfinite(s.slope) || s.slope < 0.0) {
      throw Error(ErrorCode::InvalidInput,
                  "PiecewiseTransform: coefficients must be finite with non-negative slope");
    }
  }
}

PiecewiseTransform PiecewiseTransform::affine(std::size_t m, double intercept, double slope) {
  return PiecewiseTransform(equiprobable_breakpoints(m),
                            std::vector<Segment>(m, Segment{intercept, slope}));
}

std::size_t PiecewiseTransform::segment_of(double z) const noexcept {
  return static_cast<std::size_t>(
      std::lower_bound(breakpoints_.begin(), breakpoints_.end(), z) - breakpoints_.begin());
}

double PiecewiseTransform::operator()(double z) const noexcept {
  const auto& s = segments_[segment_of(z)];
  return s.intercept + s.slope * z;
}

PiecewiseTransform fit_piecewise(const EmpiricalMarginal& marginal, std::size_t m) {
  if (m < 2) throw Error(ErrorCode::InvalidInput, "fit_piecewise: m must be >= 2");
  const auto x = marginal.values();
  const std::size_t n = x.size();
  if (n < 2 * m) {
    throw Error(ErrorCode::InsufficientData,
                "fit_piecewise: need n >= 2m (n=" + std::to_string(n) +
                    ", m=" + std::to_string(m) + ")");
  }

  auto breakpoints = equiprobable_breakpoints(m);

  struct Accumulator {
    std::size_t count = 0;
    double sz = 0.0, sx = 0.0;
  };
  std::vector<Accumulator> acc(m);
  std::vector<double> z(n);
  std::vector<std::size_t> seg(n);

  // Tie groups share one Gaussian score.
  const double dn = static_cast<double>(n);
  for (std::size_t first = 0; first < n;) {
    std::size_t last = first + 1;
    while (last < n && x[last] == x[first]) ++last;
    const double score = norm_quantile((group_rank(first, last) - 0.5) / dn);
    const auto k = static_cast<std::size_t>(
        std::lower_bound(breakpoints.begin(), breakpoints.end(), score) - breakpoints.begin());
    for (std::size_t i = first; i < last; ++i) {
      z[i] = score;
      seg[i] = k;
      acc[k].count += 1;
      acc[k].sz += score;
      acc[k].sx += x[i];
    }
    first = last;
  }

  std::vector<double> szz(m, 0.0), szx(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = seg[i];
    const double cnt = static_cast<double>(acc[k].count);
    const double dz = z[i] - acc[k].sz / cnt;
    szz[k] += dz * dz;
    szx[k] += dz * (x[i] - acc[k].sx / cnt);
  }

  std::vector<PiecewiseTransform::Segment> segments(m);
  for (std::size_t k = 0; k < m; ++k) {
    if (acc[k].count == 0) {
      // Only possible with heavy ties: hold the segment at its central quantile.
      const double p = (static_cast<double>(k) + 0.5) / static_cast<double>(m);
      segments[k] = {empirical_quantile(marginal, p), 0.0};
      continue;
    }
    const double cnt = static_cast<double>(acc[k].count);
    const double zbar = acc[k].sz / cnt;
    const double xbar = acc[k].sx / cnt;
    double slope = szz[k] > 0.0 ? szx[k] / szz[k] : 0.0;
    if (slope < 0.0) slope = 0.0;
    segments[k] = {xbar - slope * zbar, slope};
  }
  enforce_monotone(breakpoints, segments);
  return PiecewiseTransform(std::move(breakpoints), std::move(segments));
}

std::vector<std::size_t> ranks(std::span<const double> series) {
  std::vector<std::size_t> order(series.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return series[a] < series[b]; });
  std::vector<std::size_t> r(series.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) r[order[pos]] = pos;
  return r;
}

std::vector<double> rank_remap(std::span<const std::size_t> source_ranks,
                               const EmpiricalMarginal& target) {
  const auto values = target.values();
  if (source_ranks.size() != values.size()) {
    throw Error(ErrorCode::InvalidInput,
                "rank_remap: rank vector length " + std::to_string(source_ranks.size()) +
                    " differs from target size " + std::to_string(values.size()));
  }
  std::vector<bool> seen(values.size(), false);
  std::vector<double> out(values.size());
  for (std::size_t t = 0; t < source_ranks.size(); ++t) {
    const auto r = source_ranks[t];
    if (r >= values.size() || seen[r]) {
      throw Error(ErrorCode::InvalidInput, "rank_remap: source ranks are not a permutation");
    }
    seen[r] = true;
    out[t] = values[r];
  }
  return out;
}

}  // namespace vstap
