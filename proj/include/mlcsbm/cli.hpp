#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mlcsbm {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2, kExitCap = 3 };

/// Parses and runs one command. args excludes the program name. Diagnostics
/// go to err; results go to the --out path (stdout when absent).
int dispatch(const std::vector<std::string>& args, std::ostream& err);

}  // namespace mlcsbm
