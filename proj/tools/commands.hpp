#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emkin::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kInvalidParameters = 2,
  kInvalidData = 3,
  kModelInapplicable = 4,
};

/// Runs one invocation. `args` excludes the program name. Output files are
/// written directly; `-` as a path means `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace emkin::cli
