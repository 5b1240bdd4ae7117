#pragma once

#include <iosfwd>

namespace itv {

enum ExitCode : int { kExitOk = 0, kExitUnexpected = 1, kExitInput = 2, kExitCapacity = 3 };

/// Entry point of the itv_audit command line. Never throws; maps errors to
/// exit codes and writes diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace itv
