#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gdms::cli {

enum ExitCode : int { kSuccess = 0, kComputationFailure = 1, kInputFailure = 2 };

/// Runs the command line `args` (without the program name). Reports and CSV go to `out`
/// (or to --out), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gdms::cli
