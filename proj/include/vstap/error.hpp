// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vstap {

enum class ErrorCode {
  InvalidInput,
  InsufficientData,
  DegenerateInput,
  DegenerateRegion,
  NumericallySingular,
  NonStationary,
  RepairFailed,
  Infeasible,
  InsufficientAcceptance,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is
/// stable and machine-readable; the message carries human context.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace vstap
