#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lazybn {

/// Runs the command line `args` (program name excluded).
/// Returns 0 on success, 1 on usage/validation errors, 2 on impossible evidence.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lazybn
