#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mblast/complexity.hpp"
#include "mblast/montecarlo.hpp"
#include "mblast/throughput.hpp"

namespace mblast {

// CSV schemas (header lines):
//   ber.csv   detector,eb_n0_db,bits,errors,ber,ci_low,ci_high,macs
//   conv.csv  detector,iteration,ber,ci_low,ci_high,bits,errors
//   macs.csv  users,rx_antennas,iterations,beta,formula_mblast,formula_mmse,formula_vblast,
//             formula_ratio_pct,formula_vblast_ratio,measured_mblast,measured_mmse,
//             measured_vblast,measured_ratio_pct,measured_vblast_ratio
//   sinr.csv  detector,snr_db,sinr_db,sinr_linear,ci_half_db,trials
//   tput.csv  cdf_source,percentile,baseline,gain_pct,target,operating_snr_db,rate_target,rate_baseline
// Iteration 0 in conv.csv marks a one-shot detector.

std::string ber_csv(const BerResult& r);
nlohmann::json ber_json(const BerResult& r);

std::string convergence_csv(const ConvergenceResult& r);
nlohmann::json convergence_json(const ConvergenceResult& r);

std::string complexity_csv(const std::vector<ComplexityRow>& rows);
nlohmann::json complexity_json(const std::vector<ComplexityRow>& rows);

std::string sinr_csv(const std::vector<SinrCurve>& curves);
nlohmann::json sinr_json(const std::vector<SinrCurve>& curves);

std::string throughput_csv(const std::vector<GainRow>& rows);
nlohmann::json throughput_json(const std::vector<GainRow>& rows);

std::vector<TransferCurve> to_transfer_curves(const std::vector<SinrCurve>& curves);

/// Writes through a temporary file and renames, so readers never observe a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Fixed-format number rendering shared by every CSV column.
std::string fmt_num(double v);

}  // namespace mblast
