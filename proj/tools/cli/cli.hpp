#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace typesize::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kSchema = 2,
  kInvariant = 3,
  kResource = 4,
  kCorrupt = 5,
  kIo = 6,
};

/// Runs one `tsz` invocation. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace typesize::cli
