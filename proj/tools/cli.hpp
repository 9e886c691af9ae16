#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uwbloc::cli {

/// Runs one invocation of the `uwbloc` command line. `args` excludes the
/// program name. Returns the process exit status.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uwbloc::cli
