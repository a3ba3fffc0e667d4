#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace linksched {

/// Runs the command line with `args` (program name excluded).
/// Returns 0 on success, 1 for infeasible or mismatched inputs, 2 for usage
/// and parse errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace linksched
