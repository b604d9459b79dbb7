#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace soma::cli {

/// Exit statuses of the batch CLI.
enum ExitStatus : int {
    kExitOk = 0,
    kExitValidation = 1,
    kExitInput = 2,
};

/// Runs one invocation; `args` excludes the program name. Reports go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace soma::cli
