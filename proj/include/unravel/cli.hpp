#pragma once

#include <ostream>

namespace unravel {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitConvergence = 3 };

/// Entry point shared by the executable and the tests. Data goes to `out`
/// (or the --output file), diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unravel
