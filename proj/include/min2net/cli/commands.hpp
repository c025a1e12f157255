#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace min2net::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitConfig = 2;

/// Runs the tool on `args` (without the program name). Results go to `out`,
/// progress and errors to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace min2net::cli
