#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hpg {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,   ///< bad flags or parameter values
  kExitIo = 2,      ///< unreadable input or unwritable output
  kExitData = 3,    ///< malformed or inconsistent input data
};

/// Runs the tool on `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hpg
