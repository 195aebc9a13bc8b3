#pragma once

#include <string>
#include <vector>

namespace pressmap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitTraining = 4;

/// Runs one `pressmap` subcommand; `args` excludes the program name.
/// Errors print a single `error[code]: reason` line to stderr.
int run(const std::vector<std::string>& args);
int run(int argc, const char* const* argv);

}  // namespace pressmap::cli
