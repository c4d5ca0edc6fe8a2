#pragma once

#include <iosfwd>

namespace cpdcond {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitUsage = 2, kExitIo = 3, kExitInsufficientData = 4 };

/// Entry point: subcommands sample, fit, condition, bf-table, verify.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cpdcond
