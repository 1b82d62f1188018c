#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mblast {

/// Empirical CDF of a user's uplink SINR, points sorted by SINR.
struct SinrCdf {
  std::vector<double> sinr_db;
  std::vector<double> cdf;
  std::string label;

  void validate() const;
};

/// CSV with header `sinr_db,cdf`.
SinrCdf load_cdf(const std::filesystem::path& path, std::string label = {});

/// Shannon SISO-AWGN capacity log2(1 + sinr), bits/s/Hz.
double shannon_rate(double sinr_linear);

/// SINR (dB) at percentile p in [0, 100], linear interpolation of the CDF.
double percentile_sinr(const SinrCdf& cdf, double percentile);

/// A detector's measured input-SNR -> output-SINR curve.
struct TransferCurve {
  std::string detector;
  std::vector<double> snr_db;       // strictly increasing
  std::vector<double> sinr_linear;

  /// Output SINR (linear) at the given input SNR, interpolated in dB.
  double at(double snr_db_in) const;
};

/// 100 (rate_A / rate_B - 1) at the CDF's percentile operating point.
double relative_gain(const TransferCurve& a, const TransferCurve& b, const SinrCdf& cdf,
                     double percentile, bool floor_at_zero = false);

struct GainRow {
  std::string cdf_source;
  double percentile = 0.0;
  std::string target;
  std::string baseline;
  double operating_snr_db = 0.0;
  double rate_target = 0.0;
  double rate_baseline = 0.0;
  double gain_pct = 0.0;
};

std::vector<GainRow> throughput_table(const std::vector<TransferCurve>& curves, const std::string& target,
                                      const std::vector<SinrCdf>& cdfs, const std::vector<double>& percentiles,
                                      bool floor_at_zero = false);

}  // namespace mblast
