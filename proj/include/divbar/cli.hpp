// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace divbar {

inline constexpr int kExitInvalidConfig = 1;
inline constexpr int kExitSolverError = 2;
inline constexpr int kExitVerificationFailed = 3;

/// Entry point of the `divbar` tool. Subcommands: solve, verify, simulate,
/// explicit2, barriers.
int run_cli(int argc, char const* const* argv, std::ostream& out, std::ostream& err);

}  // namespace divbar
