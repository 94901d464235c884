#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace disparity {

/// Exit codes returned by dispatch.
enum ExitCode : int {
  kExitOk = 0,
  kExitFlagged = 1,  // ran to completion but found a failure (e.g. a counterexample)
  kExitUsage = 2,
  kExitError = 3,
};

/// Runs one command. `args` excludes the program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace disparity
