#pragma once

#include <cstdint>
#include <vector>

#include "mblast/detectors.hpp"

namespace mblast {

/// Closed-form MAC counts with all leading constants set to one:
///   MMSE     K^2 M + K^3 + K M + K^2
///   SIC      sum_{k=1..K} MMSE(K - k + 1, M)
///   PIC/M-BLAST  2 t K M
///   MF       K M
struct MacModel {
  DetectorKind kind = DetectorKind::Mmse;
  int num_users = 1;
  int num_rx = 1;
  int iterations = 1;
};

std::uint64_t mac_formula(const MacModel& model);

/// mac_formula(a) / mac_formula(b).
double formula_ratio(const MacModel& a, const MacModel& b);

/// Counted MACs of one detector call on a random Rayleigh instance of the
/// given size (BPSK real model, equal powers).
MacCounter measure_macs(const DetectorSpec& spec, int num_users, int num_rx, std::uint64_t seed = 1);

struct ComplexityRow {
  int num_users = 0;
  int num_rx = 0;
  int iterations = 0;
  std::uint64_t formula_mblast = 0;
  std::uint64_t formula_mmse = 0;
  std::uint64_t formula_vblast = 0;
  double formula_ratio_pct = 0.0;    // M-BLAST / MMSE
  double formula_vblast_ratio = 0.0; // V-BLAST / MMSE
  // Counted values; zero when the configuration exceeds the measurement cap.
  std::uint64_t measured_mblast = 0;
  std::uint64_t measured_mmse = 0;
  std::uint64_t measured_vblast = 0;
  double measured_ratio_pct = 0.0;
  double measured_vblast_ratio = 0.0;
};

struct TableConfig {
  int num_users;
  int num_rx;
  int iterations;
};

/// The five (K, M, t) reference operating points of the complexity comparison.
std::vector<TableConfig> reference_table_configs();

ComplexityRow complexity_row(const TableConfig& c, int measure_up_to_users);

}  // namespace mblast
