#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qcompat::cli {

enum ExitCode : int { kSuccess = 0, kValidationError = 1, kSolverFailure = 2 };

/// args excludes the program name. Reports go to `out` (or the -o file),
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qcompat::cli
