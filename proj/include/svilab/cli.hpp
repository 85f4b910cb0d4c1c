#ifndef SVILAB_CLI_HPP
#define SVILAB_CLI_HPP

// Subcommand dispatch behind the svilab executable. Reports are computed in
// full before anything is written, so a failed run leaves only error.json.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace svilab {

enum class OutputFormat { json, csv, both };

struct RunConfig {
  std::string command;
  std::filesystem::path config;
  std::uint64_t seed = 0;
  std::filesystem::path out = ".";
  int workers = 1;
  OutputFormat format = OutputFormat::both;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumerical = 3;

const std::vector<std::string>& cli_commands();

/// Runs one subcommand; returns the process exit status. Progress lines go to `log`.
int run(const RunConfig& config, std::ostream& log);

}  // namespace svilab

#endif  // SVILAB_CLI_HPP
