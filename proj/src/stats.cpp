#include "mblast/stats.hpp"

#include <cmath>

#include "mblast/types.hpp"

namespace mblast {

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {successes <= 0 ? 0.0 : std::max(0.0, center - half),
          successes >= trials ? 1.0 : std::min(1.0, center + half)};
}

double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double bpsk_awgn_ber(double eb_n0_db) { return q_function(std::sqrt(2.0 * db_to_linear(eb_n0_db))); }

std::optional<double> crossing_point(std::span<const double> grid, std::span<const double> values,
                                     double target) {
  if (grid.size() != values.size() || grid.size() < 2 || !(target > 0.0)) return std::nullopt;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double a = values[i];
    const double b = values[i + 1];
    if (a >= target && b < target) {
      if (b <= 0.0) return grid[i + 1];
      const double la = std::log10(a);
      const double lb = std::log10(b);
      const double f = (la - std::log10(target)) / (la - lb);
      return grid[i] + f * (grid[i + 1] - grid[i]);
    }
  }
  return std::nullopt;
}

double mcnemar_z(std::int64_t worse, std::int64_t better) {
  const auto n = worse + better;
  if (n == 0) return 0.0;
  return static_cast<double>(worse - better) / std::sqrt(static_cast<double>(n));
}

}  // namespace mblast
