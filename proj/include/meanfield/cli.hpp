#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "meanfield/config.hpp"

namespace meanfield {

inline constexpr const char* kToolName = "meanfield-lab";
inline constexpr const char* kToolVersion = "0.1.0";

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"solve", "sweep",    "bubble",    "mt-check",
                                              "phi",   "classify", "mesh-info", "profile-check"};
  return names;
}

struct CliOptions {
  std::string subcommand;
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<long long> seed;
  std::vector<std::string> overrides;
  std::optional<int> threads;
};

/// Runs one subcommand and writes its artifacts. Returns the exit status:
/// 0 on success, 1 on a module error, 2 on a config error. Errors are also
/// printed to `out` as a single JSON line.
int run(const CliOptions& options, std::ostream& out);

/// Parses argv (CLI11) and calls run(); argument errors exit with 2.
int run_cli(int argc, char** argv, std::ostream& out);

/// Applies the command-line flags to the parsed file and checks every
/// section and key against the known schema. Throws ConfigError.
Config resolve_config(const CliOptions& options);

}  // namespace meanfield
