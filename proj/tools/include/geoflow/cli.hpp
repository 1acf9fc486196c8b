#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace geoflow::cli {

/// Exit codes of `dispatch`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Parses argv (argv[0] is the program name), runs the subcommand and returns the exit code.
/// Diagnostics go to `err`, progress and --version/--help output to `out`.
int dispatch(const std::vector<std::string> &argv, std::ostream &out, std::ostream &err);
int dispatch(int argc, const char *const *argv);

} // namespace geoflow::cli
