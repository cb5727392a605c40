#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "cclock/run_config.hpp"

namespace cclock::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,       // runtime failure or failed validation checks
  kUsage = 2,         // malformed arguments, config or values
  kPrecondition = 3,  // p at or below the security threshold
};

/// Parses argv (without the program name) into a RunConfig: config file first,
/// then command-line flags, then CONSENSUS_CLOCK_SEED.
RunConfig parse_args(const std::vector<std::string>& args);

/// Executes one invocation. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cclock::cli
