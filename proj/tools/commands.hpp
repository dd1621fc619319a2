#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace biasaudit::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 2,
    kComputeFailure = 3,
};

// Entry point shared by main() and the tests. args excludes the program name.
int run(std::vector<std::string> const& args, std::ostream& out, std::ostream& err);

} // namespace biasaudit::cli
