#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pirt::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kRuntimeError = 3,
};

// Runs the `pirt` command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pirt::cli
