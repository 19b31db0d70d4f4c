// SPDX-License-Identifier: Apache-2.0
#include "vstap/bvn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "vstap/error.hpp"
#include "vstap/normal.hpp"

namespace vstap {

namespace {

constexpr double kTwoPi = 6.283185307179586;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Gauss-Legendre half-rules with 6, 12 and 20 points (3, 6, 10 nodes stored).
constexpr std::array<std::array<double, 10>, 3> kWeights = {{
    {0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
    {0.04717533638651177, 0.1069393259953183, 0.1600783285433464, 0.2031674267230659,
     0.2334925365383547, 0.2491470458134029},
    {0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
     0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183821,
     0.1491729864726037, 0.1527533871307259},
}};
constexpr std::array<std::array<double, 10>, 3> kNodes = {{
    {-0.9324695142031522, -0.6612093864662647, -0.238619186083197},
    {-0.9815606342467191, -0.904117256370475, -0.769902674194305, -0.5873179542866171,
     -0.3678314989981802, -0.1252334085114692},
    {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259, -0.8391169718222188,
     -0.7463319064601508, -0.636053680726515, -0.5108670019508271, -0.3737060887154196,
     -0.2277858511416451, -0.07652652113349733},
}};

void require_correlation(double rho, const char* where) {
  if (!(std::abs(rho) < 1.0)) {
    throw Error(ErrorCode::InvalidInput,
                std::string(where) + ": correlation must lie in (-1,1), got " +
                    std::to_string(rho));
  }
}

void require_rect(const Rect& r) {
  if (std::isnan(r.z1_lo) || std::isnan(r.z1_hi) || std::isnan(r.z2_lo) ||
      std::isnan(r.z2_hi) || !(r.z1_lo < r.z1_hi) || !(r.z2_lo < r.z2_hi)) {
    throw Error(ErrorCode::InvalidInput, "Rect: lower bounds must be below upper bounds");
  }
}

// Finite-limit upper orthant.
double upper_orthant_finite(double h, double k, double r) {
  const double ar = std::abs(r);
  const std::size_t rule = ar < 0.3 ? 0 : (ar < 0.75 ? 1 : 2);
  const std::size_t nodes = rule == 0 ? 3 : (rule == 1 ? 6 : 10);
  const auto& w = kWeights[rule];
  const auto& x = kNodes[rule];

  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < nodes; ++i) {
      double sn = std::sin(asr * (x[i] + 1.0) / 2.0);
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (1.0 - x[i]) / 2.0);
      bvn += w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * kTwoPi) + norm_sf(h) * norm_sf(k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (ar < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * norm_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < nodes; ++i) {
      double xs = a * (x[i] + 1.0);
      xs *= xs;
      double rs = std::sqrt(1.0 - xs);
      bvn += a * w[i] *
             (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
              std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
      xs = as * (1.0 - x[i]) * (1.0 - x[i]) / 4.0;
      rs = std::sqrt(1.0 - xs);
      bvn += a * w[i] * std::exp(-(bs / xs + hk) / 2.0) *
             (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs -
              (1.0 + c * xs * (1.0 + d * xs)));
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) bvn += norm_cdf(-std::max(h, k));
  if (r < 0.0) bvn = -bvn + std::max(0.0, norm_cdf(-h) - norm_cdf(-k));
  return bvn;
}

// Upper-orthant integrals of 1, Z1, Z2 and Z1 Z2 at corner (h, k).
PartialMoments corner_terms(double h, double k, double rho) {
  const double u = bvn_upper_orthant(h, k, rho);
  const bool h_finite = std::isfinite(h);
  const bool k_finite = std::isfinite(k);
  // phi(+-inf) = 0, so every term carrying phi(h) or phi(k) vanishes there.
  const double ph = h_finite ? norm_pdf(h) * q_integral(h, k, rho) : 0.0;
  const double pk = k_finite ? norm_pdf(k) * q_integral(k, h, rho) : 0.0;
  PartialMoments c{};
  c.p = u;
  c.m10 = ph + rho * pk;
  c.m01 = pk + rho * ph;
  c.m11 = rho * u + (h_finite ? rho * h * ph : 0.0) + (k_finite ? rho * k * pk : 0.0) +
          ((h_finite && k_finite) ? (1.0 - rho * rho) * bvn_pdf(h, k, rho) : 0.0);
  return c;
}

// Inclusion-exclusion over the four upper-orthant corners; sign (-1)^(u+v).
PartialMoments combine(const PartialMoments& lo_lo, const PartialMoments& hi_lo,
                       const PartialMoments& lo_hi, const PartialMoments& hi_hi) {
  return {lo_lo.p - hi_lo.p - lo_hi.p + hi_hi.p, lo_lo.m10 - hi_lo.m10 - lo_hi.m10 + hi_hi.m10,
          lo_lo.m01 - hi_lo.m01 - lo_hi.m01 + hi_hi.m01,
          lo_lo.m11 - hi_lo.m11 - lo_hi.m11 + hi_hi.m11};
}

struct SegmentIntegrals {
  double p;   // P(Z in seg)
  double m1;  // E(Z 1_seg)
  double m2;  // E(Z^2 1_seg)
};

SegmentIntegrals segment_integrals(double lo, double hi) {
  const double phi_lo = norm_pdf(lo);
  const double phi_hi = norm_pdf(hi);
  // Use the tail on the side that keeps the difference well conditioned.
  const double p = (lo >= 0.0) ? norm_sf(lo) - norm_sf(hi) : norm_cdf(hi) - norm_cdf(lo);
  const double lo_term = std::isfinite(lo) ? lo * phi_lo : 0.0;
  const double hi_term = std::isfinite(hi) ? hi * phi_hi : 0.0;
  return {p, phi_lo - phi_hi, p + lo_term - hi_term};
}

std::vector<double> extended_grid(const PiecewiseTransform& t) {
  std::vector<double> g;
  g.reserve(t.breakpoints().size() + 2);
  g.push_back(-kInf);
  g.insert(g.end(), t.breakpoints().begin(), t.breakpoints().end());
  g.push_back(kInf);
  return g;
}

}  // namespace

double bvn_upper_orthant(double h, double k, double rho) {
  require_correlation(rho, "bvn_upper_orthant");
  if (std::isnan(h) || std::isnan(k)) {
    throw Error(ErrorCode::InvalidInput, "bvn_upper_orthant: NaN limit");
  }
  if (h == kInf || k == kInf) return 0.0;
  if (h == -kInf) return norm_sf(k);
  if (k == -kInf) return norm_sf(h);
  return std::clamp(upper_orthant_finite(h, k, rho), 0.0, 1.0);
}

double bvn_rect_prob(const Rect& r, double rho) {
  require_correlation(rho, "bvn_rect_prob");
  require_rect(r);
  const double p = bvn_upper_orthant(r.z1_lo, r.z2_lo, rho) -
                   bvn_upper_orthant(r.z1_hi, r.z2_lo, rho) -
                   bvn_upper_orthant(r.z1_lo, r.z2_hi, rho) +
                   bvn_upper_orthant(r.z1_hi, r.z2_hi, rho);
  return std::clamp(p, 0.0, 1.0);
}

double q_integral(double a, double b, double rho) {
  require_correlation(rho, "q_integral");
  if (std::isnan(a) || std::isnan(b)) throw Error(ErrorCode::InvalidInput, "q_integral: NaN");
  if (b == -kInf) return 1.0;
  if (b == kInf) return 0.0;
  if (std::isinf(a)) {
    if (rho == 0.0) return norm_sf(b);
    return (rho * a > 0.0) ? 1.0 : 0.0;
  }
  return norm_sf((b - rho * a) / std::sqrt(1.0 - rho * rho));
}

PartialMoments rect_partial_moments(const Rect& r, double rho) {
  require_correlation(rho, "rect_partial_moments");
  require_rect(r);
  return combine(corner_terms(r.z1_lo, r.z2_lo, rho), corner_terms(r.z1_hi, r.z2_lo, rho),
                 corner_terms(r.z1_lo, r.z2_hi, rho), corner_terms(r.z1_hi, r.z2_hi, rho));
}

TruncMoments trunc_moments(const Rect& r, double rho) {
  const auto pm = rect_partial_moments(r, rho);
  if (!(pm.p > 0.0)) {
    throw Error(ErrorCode::DegenerateRegion, "trunc_moments: rectangle has zero probability");
  }
  return {pm.p, pm.m10 / pm.p, pm.m01 / pm.p, pm.m11 / pm.p};
}

ChannelStats implied_moments(const PiecewiseTransform& t) {
  const auto g = extended_grid(t);
  const auto seg = t.segments();
  std::vector<SegmentIntegrals> ints(seg.size());
  double mean = 0.0;
  for (std::size_t k = 0; k < seg.size(); ++k) {
    ints[k] = segment_integrals(g[k], g[k + 1]);
    mean += seg[k].intercept * ints[k].p + seg[k].slope * ints[k].m1;
  }
  double var = 0.0;
  for (std::size_t k = 0; k < seg.size(); ++k) {
    const double c0 = seg[k].intercept - mean;
    const double c1 = seg[k].slope;
    var += c0 * c0 * ints[k].p + 2.0 * c0 * c1 * ints[k].m1 + c1 * c1 * ints[k].m2;
  }
  return {mean, std::sqrt(std::max(var, 0.0))};
}

CorrelationMap::CorrelationMap(const PiecewiseTransform& ti, const PiecewiseTransform& tj,
                               ChannelStats si, ChannelStats sj)
    : ti_(&ti), tj_(&tj), si_(si), sj_(sj) {
  const auto bi = ti.breakpoints();
  const auto bj = tj.breakpoints();
  if (!std::equal(bi.begin(), bi.end(), bj.begin(), bj.end())) {
    throw Error(ErrorCode::InvalidInput, "psi_eval: transforms do not share breakpoints");
  }
  if (!(si.sd > 0.0) || !(sj.sd > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "psi_eval: standard deviations must be positive");
  }
  implied_i_ = implied_moments(ti);
  implied_j_ = implied_moments(tj);
  grid_ = extended_grid(ti);
}

CorrelationMap::CorrelationMap(const PiecewiseTransform& ti, const PiecewiseTransform& tj)
    : CorrelationMap(ti, tj, implied_moments(ti), implied_moments(tj)) {}

double CorrelationMap::centred_moment(double rho_z) const {
  require_correlation(rho_z, "psi_eval");
  const std::size_t g = grid_.size();
  const std::size_t m = g - 1;
  std::vector<PartialMoments> corner(g * g);
  for (std::size_t p = 0; p < g; ++p) {
    for (std::size_t q = 0; q < g; ++q) corner[p * g + q] = corner_terms(grid_[p], grid_[q], rho_z);
  }

  // Intercepts are centred on the implied means so that large offsets do not
  // cancel catastrophically; the offsets are added back below.
  const auto seg_i = ti_->segments();
  const auto seg_j = tj_->segments();
  double centred = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double ci0 = seg_i[k].intercept - implied_i_.mean;
    const double ci1 = seg_i[k].slope;
    for (std::size_t l = 0; l < m; ++l) {
      const double cj0 = seg_j[l].intercept - implied_j_.mean;
      const double cj1 = seg_j[l].slope;
      const auto cell = combine(corner[k * g + l], corner[(k + 1) * g + l],
                                corner[k * g + l + 1], corner[(k + 1) * g + l + 1]);
      centred += ci0 * cj0 * cell.p + ci1 * cj0 * cell.m10 + ci0 * cj1 * cell.m01 +
                 ci1 * cj1 * cell.m11;
    }
  }
  return centred;
}

double CorrelationMap::product_moment(double rho_z) const {
  return centred_moment(rho_z) + implied_i_.mean * implied_j_.mean;
}

double CorrelationMap::operator()(double rho_z) const {
  // E[XiXj] - mean_i mean_j; the offset term is exactly zero when the
  // supplied means are the implied ones.
  const double offset = implied_i_.mean * implied_j_.mean - si_.mean * sj_.mean;
  return std::clamp((centred_moment(rho_z) + offset) / (si_.sd * sj_.sd), -1.0, 1.0);
}

double psi_eval(const PiecewiseTransform& ti, const PiecewiseTransform& tj, double rho_z,
                ChannelStats si, ChannelStats sj) {
  return CorrelationMap(ti, tj, si, sj)(rho_z);
}

}  // namespace vstap
