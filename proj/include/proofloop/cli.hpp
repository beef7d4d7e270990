#pragma once

#include <string>
#include <vector>

namespace proofloop::cli {

// Runs one subcommand end to end. Exit codes: 0 success, 2 unknown command or
// invalid configuration (usage goes to stderr), 1 runtime failure.
int dispatch(int argc, const char* const* argv);

// Convenience overload for tests; `args` excludes the program name.
int dispatch(const std::vector<std::string>& args);

}  // namespace proofloop::cli
