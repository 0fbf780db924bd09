#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jmvd::cli {

/// Stable exit codes.
enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kContinuationError = 3,
    kBudgetExhausted = 4,
    kVerificationFailed = 5,
};

/// Runs the command line `args` (args[0] is the program name); output goes to out/err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jmvd::cli
