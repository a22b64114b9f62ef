#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace txflow::cli {

enum ExitCode : int { kOk = 0, kDataError = 1, kUsageError = 2, kNumericError = 3 };

/// Runs the `txflow` command line with argv-style arguments (args[0] is the
/// program name). Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace txflow::cli
