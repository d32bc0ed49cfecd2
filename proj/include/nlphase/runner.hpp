#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nlphase/config.hpp"

namespace nlphase {

/// Exit codes of the command-line runner.
enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitInconclusive = 2, kExitError = 3 };

struct RunOutcome {
  int exit_code = kExitError;
  /// Deterministic report body (no timestamps).
  Json report;
  /// (artifact name, CSV text) pairs.
  std::vector<std::pair<std::string, std::string>> csv;
};

std::vector<std::string> command_names();

/// Runs one subcommand on a parsed config. Options are read from config.options[command].
RunOutcome run_command(const std::string& command, const RunConfig& config);

/// Full command line: `nlphase <subcommand> (--preset NAME | --config PATH) [--out PATH]
/// [--threads N] [--seed S]`. Prints the JSON report to `out`; with an output path the report and
/// CSV artifacts (<stem>_<name>.csv) are also written to disk.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nlphase
