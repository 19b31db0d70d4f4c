// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vstap {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct ValidateOptions {
  std::uint64_t seed = 20240601;
  std::size_t mc_samples = 2'000'000;
};

/// Self-checks against known values and the Monte-Carlo oracle: rectangle
/// moments, solver round trips, the uniform NORTA triple, the correlation
/// matrix repair example and the total-expectation identity.
std::vector<CheckResult> run_validation(const ValidateOptions& options = {});

}  // namespace vstap
