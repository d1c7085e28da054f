#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace arena {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `arena` tool. args[0] is the program name. Settings
/// resolve as defaults, then --config file, then ARENA_* variables from `env`,
/// then flags. Returns the process exit code; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::map<std::string, std::string>& env);

}  // namespace arena
