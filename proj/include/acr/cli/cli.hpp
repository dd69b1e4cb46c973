#pragma once

// acr-scope command-line front end. Exit codes: 0 ok, 2 input error,
// 3 assumption violation, 4 runtime failure.

#include <ostream>

namespace acr::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kAssumptionViolation = 3,
    kRuntimeFailure = 4,
};

/// Configures the default logger on stderr at the level named by
/// ACR_SCOPE_LOG (trace, debug, info, warn, error, off; default info).
void configure_logging();

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace acr::cli
