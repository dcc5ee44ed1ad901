#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pnp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDisagree = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs `pnp <subcommand> [flags]`; args excludes the program name.
/// A `--config FILE` of key=value lines supplies defaults that flags override.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads key=value lines; '#' starts a comment. Returns "--key=value" tokens.
std::vector<std::string> config_file_args(const std::string& path);

}  // namespace pnp::cli
