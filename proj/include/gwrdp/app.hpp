#pragma once

// Subcommands shared by the command-line tool and the Python module. Each
// takes a parsed JSON config and returns the documents it would write.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gwrdp/io.hpp"

namespace gwrdp {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitResource = 3,
  kExitNonConvergence = 4,
};

struct RunOptions {
  std::optional<std::uint64_t> seed;        // overrides the config's "seed"
  std::size_t threads = 0;                  // 0 uses all hardware threads
  std::optional<std::uint64_t> memory_cap;  // overrides the config's "memory_cap"
};

struct CommandOutput {
  std::string json_name;  // file name of the main document
  Json document;          // without manifest
  std::vector<std::pair<std::string, std::string>> csv_files;  // (name, body)
  std::string summary;    // one line for standard output
  int exit_code = kExitOk;
};

CommandOutput cmd_rdp(const Json& config, const RunOptions& options);
CommandOutput cmd_region(const Json& config, const RunOptions& options);
CommandOutput cmd_simulate(const Json& config, const RunOptions& options);
CommandOutput cmd_derand_audit(const Json& config, const RunOptions& options);

struct SelftestCase {
  std::string name;
  bool pass = false;
  std::string detail;
};
std::vector<SelftestCase> run_selftest();
CommandOutput cmd_selftest(const RunOptions& options);

// Maps a library exception to its exit code.
int exit_code_for(const std::exception& e);

// Full command line: parses flags, runs a subcommand, writes outputs with the
// embedded manifest, prints a summary line. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gwrdp
