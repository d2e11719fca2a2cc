#pragma once

#include <iosfwd>

namespace deltacharger::cli {

enum ExitCode { kOk = 0, kFailure = 1, kUsage = 2, kIoError = 3, kDataError = 4 };

/// Entry point of the `deltacharger` tool; all output goes to the given streams.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace deltacharger::cli
