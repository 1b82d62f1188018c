#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace mblast {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kExitOk = 0, kExitFailure = 1, kExitConfig = 2, kExitIo = 3 };

/// Parsed command line. Overrides replace the matching config values.
struct CliOptions {
  std::string command;  // ber | convergence | sinr | throughput | complexity | validate
  std::filesystem::path config_path;
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> detectors;  // comma-separated tokens
  std::optional<std::string> grid_db;    // comma-separated dB values
  std::optional<double> eb_n0_db;        // convergence operating point
};

/// Runs one command. Errors are reported on `err` and mapped to exit codes:
/// 2 for invalid configuration, 3 for file-system problems.
int run_command(const CliOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace mblast
