#pragma once

// The examweight command line: fit, evaluate, analyze and generate.

#include <iosfwd>

namespace examweight::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInternal = 70;

/// Runs one invocation. Reports without --out go to `out`; diagnostics go
/// to `err`. EXAMWEIGHT_STRICT=1 in the environment acts like --strict.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace examweight::cli
