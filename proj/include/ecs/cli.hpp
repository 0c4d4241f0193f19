#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ecs::cli {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitNumeric = 1,  // computation failed on valid input
  kExitInput = 2,    // unreadable / malformed input or bad flags
};

/// Runs one invocation. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace ecs::cli
