// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace vstap::cli {

/// Parses arguments and runs one subcommand. Reports go to `out` as JSON;
/// the exit code is zero iff the report carries no error object.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vstap::cli
