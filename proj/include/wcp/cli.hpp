#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wcp::cli {

/// Output directory override for every command that writes files.
inline constexpr const char* kOutputDirEnv = "WCP_OUTPUT_DIR";

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 when a command fails and 2 for usage errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wcp::cli
