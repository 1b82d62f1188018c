#include "mblast/complexity.hpp"

#include "mblast/channel.hpp"
#include "mblast/rng.hpp"

namespace mblast {

namespace {

std::uint64_t mmse_macs(std::uint64_t K, std::uint64_t M) { return K * K * M + K * K * K + K * M + K * K; }

}  // namespace

std::uint64_t mac_formula(const MacModel& model) {
  if (model.num_users < 1 || model.num_rx < 1) throw std::invalid_argument("K and M must be positive");
  const auto K = static_cast<std::uint64_t>(model.num_users);
  const auto M = static_cast<std::uint64_t>(model.num_rx);
  switch (model.kind) {
    case DetectorKind::MatchedFilter:
      return K * M;
    case DetectorKind::Zf:
    case DetectorKind::Mmse:
      return mmse_macs(K, M);
    case DetectorKind::ZfSic:
    case DetectorKind::MmseSic: {
      std::uint64_t sum = 0;
      for (std::uint64_t k = 1; k <= K; ++k) sum += mmse_macs(K - k + 1, M);
      return sum;
    }
    case DetectorKind::Pic:
    case DetectorKind::MBlast:
      if (model.iterations < 1) throw std::invalid_argument("iterative MAC model needs t >= 1");
      return 2 * static_cast<std::uint64_t>(model.iterations) * K * M;
  }
  return 0;
}

double formula_ratio(const MacModel& a, const MacModel& b) {
  return static_cast<double>(mac_formula(a)) / static_cast<double>(mac_formula(b));
}

MacCounter measure_macs(const DetectorSpec& spec, int num_users, int num_rx, std::uint64_t seed) {
  auto rng = substream(seed, {0xC0DEULL, static_cast<std::uint64_t>(num_users), static_cast<std::uint64_t>(num_rx)});
  const auto ch = generate_channel(num_users, num_rx, rng);
  const Matrix H = active_columns(lift_to_real(ch, PowerProfile::equal(num_users)), Constellation::Bpsk);
  const Vector x = random_symbols(num_users, rng);
  const Vector y = transmit(H, x, 0.1, rng);
  const DetectorInput in{H, y, 0.1, static_cast<double>(num_users) / num_rx, Constellation::Bpsk};
  return run_detector(spec, in).out.macs;
}

std::vector<TableConfig> reference_table_configs() {
  return {{8, 64, 5}, {32, 96, 5}, {64, 192, 5}, {500, 1000, 10}, {1000, 2000, 10}};
}

ComplexityRow complexity_row(const TableConfig& c, int measure_up_to_users) {
  ComplexityRow row;
  row.num_users = c.num_users;
  row.num_rx = c.num_rx;
  row.iterations = c.iterations;
  row.formula_mblast = mac_formula({DetectorKind::MBlast, c.num_users, c.num_rx, c.iterations});
  row.formula_mmse = mac_formula({DetectorKind::Mmse, c.num_users, c.num_rx, 1});
  row.formula_vblast = mac_formula({DetectorKind::MmseSic, c.num_users, c.num_rx, 1});
  row.formula_ratio_pct = 100.0 * static_cast<double>(row.formula_mblast) / static_cast<double>(row.formula_mmse);
  row.formula_vblast_ratio = static_cast<double>(row.formula_vblast) / static_cast<double>(row.formula_mmse);
  if (c.num_users <= measure_up_to_users) {
    DetectorSpec mb;
    mb.kind = DetectorKind::MBlast;
    mb.iterations = c.iterations;
    // Counted on the K-dimensional real model so every detector is measured in
    // the same real-MAC unit.
    DetectorSpec mmse;
    mmse.domain = LinearDomain::Real;
    DetectorSpec sic = mmse;
    sic.kind = DetectorKind::MmseSic;
    row.measured_mblast = measure_macs(mb, c.num_users, c.num_rx).total();
    row.measured_mmse = measure_macs(mmse, c.num_users, c.num_rx).total();
    row.measured_vblast = measure_macs(sic, c.num_users, c.num_rx).total();
    row.measured_ratio_pct = 100.0 * static_cast<double>(row.measured_mblast) / static_cast<double>(row.measured_mmse);
    row.measured_vblast_ratio = static_cast<double>(row.measured_vblast) / static_cast<double>(row.measured_mmse);
  }
  return row;
}

}  // namespace mblast
