#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mblast/channel.hpp"
#include "mblast/coding.hpp"
#include "mblast/detectors.hpp"

namespace mblast {

struct CsiSpec {
  bool perfect = true;
  // Pilot SNR relative to the data-symbol SNR, unless an absolute value is set.
  double pilot_offset_db = 6.0;
  std::optional<double> pilot_snr_db;
  double noise_var_mismatch = 0.0;

  CsiConfig resolve(double data_snr_linear) const;
};

struct CodingSpec {
  ConvCode code;
  int block_length = 128;  // information bits per user per block
  bool interleave = false;
};

struct StopRule {
  std::int64_t min_errors = 200;
  std::int64_t max_bits = 2'000'000;
  std::int64_t max_trials = 0;  // 0: no trial cap
  int batch_trials = 32;        // stop rule is evaluated at batch boundaries
};

struct ExperimentConfig {
  int num_users = 8;
  int num_rx = 64;
  Constellation constellation = Constellation::Bpsk;
  FadingModel fading = FadingModel::Rayleigh;
  std::vector<DetectorSpec> detectors;
  std::vector<double> eb_n0_db;
  CsiSpec csi;
  PowerSpec power = EqualPowers{};
  std::optional<CodingSpec> coding;
  StopRule stop;
  std::uint64_t seed = 1;
  int workers = 1;  // 0: one per hardware thread
  std::int64_t sinr_min_trials = 10;

  double beta() const { return static_cast<double>(num_users) / num_rx; }
  double code_rate() const { return coding ? 0.5 : 1.0; }
  /// sigma^2 per complex dimension at the given Eb/N0. Symbols have unit
  /// energy per real dimension, so Eb = 1 for both alphabets.
  double sigma2_for_eb_n0(double eb_n0_db) const;
  int real_dims() const { return constellation == Constellation::Bpsk ? num_users : 2 * num_users; }
  void validate() const;
};

struct BerPoint {
  double eb_n0_db = 0.0;
  std::int64_t trials = 0;
  std::int64_t bits = 0;
  std::int64_t errors = 0;
  double ber = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t macs_per_detection = 0;
  std::uint64_t macs_total = 0;
};

struct BerCurve {
  std::string detector;
  std::vector<BerPoint> points;
};

struct BerResult {
  std::vector<BerCurve> curves;
};

BerResult run_ber_sweep(const ExperimentConfig& cfg);

struct ConvergenceRow {
  std::string detector;
  int iteration = 0;  // 0 for one-shot detectors
  std::int64_t bits = 0;
  std::int64_t errors = 0;
  double ber = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Paired discordance between two iterative detectors at one iteration.
struct PairedCount {
  std::string a, b;
  int iteration = 0;
  std::int64_t a_only = 0;  // a wrong, b right
  std::int64_t b_only = 0;  // b wrong, a right
};

struct ConvergenceResult {
  double eb_n0_db = 0.0;
  std::int64_t trials = 0;
  std::vector<ConvergenceRow> rows;
  std::vector<PairedCount> paired;

  const ConvergenceRow& row(const std::string& detector, int iteration) const;
  const PairedCount& pair(const std::string& a, const std::string& b, int iteration) const;
};

ConvergenceResult run_convergence_study(const ExperimentConfig& cfg, double eb_n0_db);

struct SinrPoint {
  double snr_db = 0.0;        // per-user input Es/N0
  double sinr_linear = 0.0;   // mean over users
  double sinr_db = 0.0;
  double ci_half_db = 0.0;    // 95% half-width over users, dB
  std::int64_t trials = 0;
};

struct SinrCurve {
  std::string detector;
  std::vector<SinrPoint> points;
};

/// Post-detection SINR transfer (input Es/N0 -> output SINR). Runs
/// cfg.stop.max_trials channel uses per point (256 when unset).
std::vector<SinrCurve> run_sinr_study(const ExperimentConfig& cfg, const std::vector<double>& snr_grid_db);

/// Runs fn(i) for i in [begin, end) on `workers` threads (0: all cores).
void parallel_for(std::int64_t begin, std::int64_t end, int workers,
                  const std::function<void(std::int64_t)>& fn);

}  // namespace mblast
