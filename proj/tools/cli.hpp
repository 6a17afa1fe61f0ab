#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace blockadmm::cli {

/// Process exit codes. Stable: scripts depend on them.
enum ExitCode : int {
  kExitOk = 0,          // also: solve converged
  kExitDiverged = 2,
  kExitMaxEpochs = 3,
  kExitUsage = 64,
  kExitInvalidConfig = 65,
  kExitSoftware = 70,
  kExitIo = 74
};

/// Runs the command line `args` (without the program name), writing normal output
/// to `out` and diagnostics to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blockadmm::cli
