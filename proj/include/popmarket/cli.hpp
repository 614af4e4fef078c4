#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace popmarket {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Entry point of the `popmarket` tool. `args` includes the program name.
// Data goes to files or `out`; diagnostics and progress go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace popmarket
