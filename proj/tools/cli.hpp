#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace thermopower::cli {

/// Runs one command line (without the program name). Returns the exit code:
/// 0 success, 1 computation failure, 2 usage or input error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace thermopower::cli
