#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace mblast {

struct Interval {
  double low = 0.0;
  double high = 1.0;
};

inline constexpr double kZ95 = 1.959963984540054;

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = kZ95);

/// Gaussian tail probability Q(x).
double q_function(double x);

/// BER of uncoded BPSK over AWGN, Q(sqrt(2 Eb/N0)).
double bpsk_awgn_ber(double eb_n0_db);

/// Abscissa where `values` first falls through `target`, interpolating
/// log10(value) linearly between the bracketing grid points.
std::optional<double> crossing_point(std::span<const double> grid, std::span<const double> values,
                                     double target);

/// One-sided McNemar statistic for paired binary outcomes: `worse` counts pairs
/// where A erred and B did not, `better` the reverse. Positive favors B.
double mcnemar_z(std::int64_t worse, std::int64_t better);

}  // namespace mblast
