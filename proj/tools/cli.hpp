#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace micromacro::cli {

/// Exit codes: 0 success, 1 usage error, 2 failed run (JSON error on the error
/// stream), 3 sweep finished with some failed rows, 4 oracle check failed.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitError = 2;
inline constexpr int kExitPartial = 3;
inline constexpr int kExitCheckFailed = 4;

/// Entry point of the micromacro tool with injectable streams.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace micromacro::cli
