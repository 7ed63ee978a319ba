#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace panverif {

enum ExitCode : int { kExitOk = 0, kExitFailed = 1, kExitUsage = 2, kExitNoBackend = 3 };

/// Entry point of the `panverif` tool. Output goes to `out`, diagnostics to
/// `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace panverif
