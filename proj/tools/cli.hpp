#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridseg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitRefused = 3;

/// Runs one subcommand. `args` excludes the program name. Output files named
/// by flags are written directly; everything else goes to `out` and `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridseg::cli
