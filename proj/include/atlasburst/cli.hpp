#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace atlasburst::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitUsage = 2;

// Runs one invocation. `args` excludes the program name. Exit codes: 0
// success, 1 validation findings or a failed operation, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace atlasburst::cli
