#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mjls::cli {

enum ExitCode : int { kExitStable = 0, kExitError = 1, kExitUnstable = 2, kExitMarginal = 3 };

/// Runs one invocation of the command-line tool. `args` excludes the program
/// name. JSON goes to `out`; diagnostics and the run manifest go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mjls::cli
