#pragma once

namespace gridwave {

inline constexpr const char* kToolVersion = "0.1.0";

/// Parses argv and runs one subcommand. Returns the process exit code:
/// 0 success, 1 domain/validation error, 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace gridwave
