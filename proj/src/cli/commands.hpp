#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace flowseek::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitRuntime = 3,
  kExitNoTransition = 4,
};

// Parses and runs one command. args[0] is the program name. Diagnostics go to
// err, progress lines to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace flowseek::cli
