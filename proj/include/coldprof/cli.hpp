#pragma once

#include <ostream>

namespace coldprof {

/// Exit codes: 0 success (gate: below threshold), 1 error or usage error,
/// 2 gate verdict "profile-worthy".
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitProfileWorthy = 2;

/// Entry point of the `coldprof` tool; writes to the given streams instead of
/// stdout/stderr so it can be driven in-process.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coldprof
