#pragma once

#include <string>
#include <vector>

namespace spagg {

// Runs the command-line front end. Returns the process exit code:
// 0 success, 1 configuration/validation error, 2 runtime failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace spagg
