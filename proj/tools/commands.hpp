#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace formation::cli {

/// Exit codes shared by every command.
enum ExitCode : int { kPass = 0, kFail = 1, kIndeterminate = 2, kError = 3 };

/// Runs formctl with argv[0] omitted. Output goes to `out`, diagnostics to
/// `err`; the return value is the process exit code.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

} // namespace formation::cli
