#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qsearch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitResource = 3;

/// Parses `args` (without the program name), dispatches the subcommand and
/// returns the process exit code. Results go to `out` unless --out names a
/// file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace qsearch::cli
