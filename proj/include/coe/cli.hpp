#pragma once

#include <string>
#include <vector>

namespace coe {

/// Entry point of the command line tool.  `args` is the argument list
/// without the program name.  Returns the process exit code: 0 on
/// success, 1 on a usage or software error, 2 when a mathematical
/// hypothesis fails (a condition report or the exponent gap).
int run_cli(const std::vector<std::string>& args);

}  // namespace coe
