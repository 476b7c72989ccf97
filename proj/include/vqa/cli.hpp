#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vqa {

enum ExitCode : int { kExitOk = 0, kExitFatal = 1, kExitPartial = 2 };

/// Entry point of the `vqa` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Merges a JSON config file into the argument list: each key becomes
/// --key unless that flag is already present. Throws Error on bad input.
std::vector<std::string> merge_config_args(const std::vector<std::string>& args);

}  // namespace vqa
