#pragma once

#include <iosfwd>

namespace gec {

// Exit codes of the gec-combine tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitSolver = 3,
};

// Entry point of the gec-combine tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gec
