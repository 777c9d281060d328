#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evspace::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitEvalError = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable naming the default method library file.
inline constexpr const char* kLibraryEnvVar = "EVSPACE_LIBRARY";
inline constexpr const char* kDefaultLibraryFile = "evspace_library.json";

/// Runs the `evspace` command line. `args` excludes the program name.
/// Returns 0 (Ok), 1 (evaluation or I/O error), 2 (usage error).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace evspace::tools
