#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hmrgeom::cli {

/// Exit codes are part of the tool's contract.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

struct CommandOutcome {
  int exit_code = kExitOk;
  std::vector<std::string> artifacts;
  std::string summary;
};

/// Runs one command line (without the program name). Normal output goes to
/// `out`, diagnostics to `err`.
CommandOutcome run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hmrgeom::cli
