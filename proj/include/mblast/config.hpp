#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mblast/montecarlo.hpp"

namespace mblast {

/// Everything one CLI run needs. Study-specific sections are optional in the
/// file and fall back to the defaults below.
struct RunConfig {
  ExperimentConfig experiment;
  double convergence_eb_n0_db = 6.0;
  std::vector<double> sinr_snr_db{0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  std::int64_t sinr_trials = 256;
  std::vector<std::filesystem::path> cdf_paths;
  std::vector<double> percentiles{10, 50, 90};
  std::string throughput_target = "mblast";
  bool floor_gains_at_zero = false;
  int measure_up_to_users = 64;
  bool seed_from_file = false;  // the environment seed applies only when unset
};

/// Relative paths inside the document resolve against `base_dir`. With
/// `validate` false the experiment invariants are left for the caller to
/// check (after applying command-line overrides). A missing "workers" key
/// means one worker per hardware thread.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {},
                       bool validate = true);

/// Throws IoError when the file cannot be read and ConfigError when it does
/// not parse or violates an invariant.
RunConfig load_config(const std::filesystem::path& path, bool validate = true);

nlohmann::json to_json(const RunConfig& cfg);

/// "mmse", "mblast:5", "mmse-sic" ...
DetectorSpec parse_detector(const std::string& token);

std::vector<double> parse_number_list(const std::string& csv);

}  // namespace mblast
