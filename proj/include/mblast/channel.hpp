#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "mblast/rng.hpp"
#include "mblast/types.hpp"

namespace mblast {

// Rayleigh: i.i.d. CN(0, 1/M) entries. Awgn: every entry 1/sqrt(M), a
// non-fading reference used for single-user anchors.
enum class FadingModel { Rayleigh, Awgn };

std::string to_string(FadingModel f);
FadingModel fading_from_string(const std::string& s);

struct ComplexChannel {
  CMatrix entries;  // M x K

  int num_rx() const { return static_cast<int>(entries.rows()); }
  int num_users() const { return static_cast<int>(entries.cols()); }
  double load() const { return static_cast<double>(num_users()) / num_rx(); }
};

/// Diagonal of the root-power matrix, sqrt(P_i) per user.
struct PowerProfile {
  Vector sqrt_powers;

  static PowerProfile equal(int num_users) { return {Vector::Ones(num_users)}; }
  int num_users() const { return static_cast<int>(sqrt_powers.size()); }
};

struct EqualPowers {};
struct LognormalPowers {
  double std_db = 8.0;
};
struct PowersFromFile {
  std::filesystem::path path;
};
using PowerSpec = std::variant<EqualPowers, LognormalPowers, PowersFromFile>;

struct CsiConfig {
  double pilot_snr = 1.0;          // linear
  double noise_var_mismatch = 0.0; // X, fractional half-width of the sigma^2 estimate
  bool perfect = true;
};

/// Real-valued equivalent model y = H x + n. `H` holds only the active real
/// dimensions: 2M x K for BPSK, 2M x 2K for QPSK.
struct RealModel {
  Matrix H;
  Vector y;
  double sigma2 = 1.0;
  double beta = 0.0;
  Constellation constellation = Constellation::Bpsk;
};

ComplexChannel generate_channel(int num_users, int num_rx, RandomEngine& rng,
                                FadingModel fading = FadingModel::Rayleigh);

/// Full 2M x 2K lift of H~ A. For x = [Re s; Im s] the product equals
/// [Re(H~ A s); Im(H~ A s)].
Matrix lift_to_real(const ComplexChannel& ch, const PowerProfile& powers);

/// Columns of the full lift that carry symbols for the given alphabet.
Matrix active_columns(const Matrix& full_lift, Constellation c);

/// Rebuilds the full 2M x 2K lift from a BPSK active matrix [Re; Im].
Matrix complete_lift(const Matrix& bpsk_active);

/// y = H x + n, n ~ N(0, sigma2/2) per real component.
Vector transmit(const Matrix& H, const Vector& x, double sigma2, RandomEngine& rng);

/// Estimated full lift of H~ A under pilot-limited estimation error: each
/// complex entry of H~ A is perturbed by CN(0, 1/(M snr_p)), which keeps the
/// lift's block structure. `perfect` returns the true lift unchanged.
Matrix impair_csi(const ComplexChannel& ch, const PowerProfile& powers, const CsiConfig& cfg,
                  RandomEngine& rng);

double perturb_noise_variance(double sigma2, double mismatch, RandomEngine& rng);

PowerProfile generate_powers(int num_users, const PowerSpec& spec, RandomEngine& rng);

/// One nonnegative linear power per line, '#' starts a comment.
std::vector<double> read_power_file(const std::filesystem::path& path);

/// Uniform +-1 symbols for `dims` real dimensions.
Vector random_symbols(int dims, RandomEngine& rng);

}  // namespace mblast
