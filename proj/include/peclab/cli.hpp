#pragma once

#include <string>
#include <vector>

namespace peclab {

/// Runs one CLI invocation. Exit codes: 0 success, 2 validation error,
/// 3 numeric non-convergence, 4 I/O error.
int run_cli(const std::vector<std::string>& args);

}  // namespace peclab
