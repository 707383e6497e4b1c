#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nvlab::cli {

// Exit codes: 0 success, 1 runtime/numeric failure, 2 usage/config failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point shared by the executable and the tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nvlab::cli
