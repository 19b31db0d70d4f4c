// SPDX-License-Identifier: Apache-2.0
#include "vstap/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "vstap/error.hpp"
#include "vstap/rng.hpp"

namespace vstap {

namespace {

void require_rho(double rho, const char* where) {
  if (!std::isfinite(rho) || std::abs(rho) >= 1.0) {
    throw Error(ErrorCode::InvalidInput, std::string(where) + ": need |rho| < 1");
  }
}

// Running sums for a Pearson correlation.
struct PairSums {
  double n = 0, sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;

  void add(double x, double y) {
    n += 1;
    sx += x;
    sy += y;
    sxx += x * x;
    syy += y * y;
    sxy += x * y;
  }

  double corr() const {
    const double cxy = sxy - sx * sy / n;
    const double cxx = sxx - sx * sx / n;
    const double cyy = syy - sy * sy / n;
    return cxy / std::sqrt(cxx * cyy);
  }
};

}  // namespace

McCorrelation mc_psi(const ScalarMap& fi, const ScalarMap& fj, double rho, std::size_t samples,
                     std::uint64_t seed) {
  require_rho(rho, "mc_psi");
  if (samples < 10000) throw Error(ErrorCode::InvalidInput, "mc_psi: need at least 10^4 samples");
  constexpr std::size_t kBatches = 20;
  GaussianStream gauss(seed);
  const double c = std::sqrt(1.0 - rho * rho);
  // Shift by the first draw to limit cancellation in the raw sums.
  std::array<PairSums, kBatches> batch{};
  double shift_x = 0.0, shift_y = 0.0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double g1 = gauss();
    const double g2 = gauss();
    double x = fi(g1);
    double y = fj(rho * g1 + c * g2);
    if (s == 0) {
      shift_x = x;
      shift_y = y;
    }
    batch[s * kBatches / samples].add(x - shift_x, y - shift_y);
  }
  PairSums all;
  for (const auto& b : batch) {
    all.n += b.n;
    all.sx += b.sx;
    all.sy += b.sy;
    all.sxx += b.sxx;
    all.syy += b.syy;
    all.sxy += b.sxy;
  }
  McCorrelation out;
  out.value = all.corr();
  out.std_error = (1.0 - out.value * out.value) / std::sqrt(static_cast<double>(samples));
  double mean = 0.0, ss = 0.0;
  for (const auto& b : batch) mean += b.corr() / kBatches;
  for (const auto& b : batch) ss += (b.corr() - mean) * (b.corr() - mean);
  out.batch_std_error = std::sqrt(ss / (kBatches - 1) / kBatches);
  return out;
}

McTruncMoments mc_trunc_moments(const Rect& r, double rho, std::size_t samples,
                                std::uint64_t seed) {
  require_rho(rho, "mc_trunc_moments");
  if (samples < 100000) {
    throw Error(ErrorCode::InvalidInput, "mc_trunc_moments: need at least 10^5 samples");
  }
  GaussianStream gauss(seed);
  const double c = std::sqrt(1.0 - rho * rho);
  double n = 0, s1 = 0, s2 = 0, s12 = 0, q1 = 0, q2 = 0, q12 = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double z1 = gauss();
    const double z2 = rho * z1 + c * gauss();
    if (z1 <= r.z1_lo || z1 > r.z1_hi || z2 <= r.z2_lo || z2 > r.z2_hi) continue;
    const double z12 = z1 * z2;
    n += 1;
    s1 += z1;
    s2 += z2;
    s12 += z12;
    q1 += z1 * z1;
    q2 += z2 * z2;
    q12 += z12 * z12;
  }
  if (n < 100) {
    throw Error(ErrorCode::InsufficientAcceptance,
                "mc_trunc_moments: only " + std::to_string(static_cast<std::size_t>(n)) +
                    " accepted samples");
  }
  McTruncMoments out;
  out.accepted = static_cast<std::size_t>(n);
  const double total = static_cast<double>(samples);
  out.p = n / total;
  out.mu10 = s1 / n;
  out.mu01 = s2 / n;
  out.mu11 = s12 / n;
  auto se = [n](double sum, double sq) {
    const double mean = sum / n;
    return std::sqrt(std::max(sq / n - mean * mean, 0.0) / n);
  };
  out.se_p = std::sqrt(out.p * (1.0 - out.p) / total);
  out.se_mu10 = se(s1, q1);
  out.se_mu01 = se(s2, q2);
  out.se_mu11 = se(s12, q12);
  return out;
}

}  // namespace vstap
