// SPDX-License-Identifier: Apache-2.0
#include "vstap/normal.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/special_functions/erf.hpp>

#include "vstap/error.hpp"

namespace vstap {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DegenerateRegion: return "DegenerateRegion";
    case ErrorCode::NumericallySingular: return "NumericallySingular";
    case ErrorCode::NonStationary: return "NonStationary";
    case ErrorCode::RepairFailed: return "RepairFailed";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::InsufficientAcceptance: return "InsufficientAcceptance";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

double norm_pdf(double x) noexcept {
  if (std::isinf(x)) return 0.0;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double norm_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x * 0.70710678118654752440);
}

double norm_sf(double x) noexcept {
  return 0.5 * std::erfc(x * 0.70710678118654752440);
}

double norm_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::InvalidInput,
                "norm_quantile: probability outside [0,1]: " + std::to_string(p));
  }
  if (p == 0.0) return -std::numeric_limits<double>::infinity();
  if (p == 1.0) return std::numeric_limits<double>::infinity();
  // Phi^-1(p) = -sqrt(2) erfc^-1(2p); erfc_inv keeps full relative
  // accuracy in both tails.
  return -1.41421356237309504880 * boost::math::erfc_inv(2.0 * p);
}

double bvn_pdf(double x, double y, double rho) noexcept {
  if (std::isinf(x) || std::isinf(y)) return 0.0;
  const double one_minus = 1.0 - rho * rho;
  const double q = (x * x - 2.0 * rho * x * y + y * y) / one_minus;
  return std::exp(-0.5 * q) / (2.0 * kPi * std::sqrt(one_minus));
}

}  // namespace vstap
