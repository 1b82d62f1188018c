#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mblast/types.hpp"

namespace mblast {

/// Multiply-accumulate tally for one detector invocation. tanh evaluations are
/// tracked separately and never enter MAC totals.
struct MacCounter {
  std::uint64_t gram = 0;    // H^T H
  std::uint64_t factor = 0;  // Cholesky and inverse
  std::uint64_t matvec = 0;  // H x, H^T z and filter application
  std::uint64_t other = 0;
  std::uint64_t tanh = 0;

  std::uint64_t total() const { return gram + factor + matvec + other; }
  MacCounter& operator+=(const MacCounter& o);
};

struct DetectorInput {
  Eigen::Ref<const Matrix> H;  // receiver's estimate, active real dimensions
  Eigen::Ref<const Vector> y;
  double sigma2;               // receiver's noise variance per complex dimension
  double beta;                 // K / M
  Constellation constellation = Constellation::Bpsk;

  int num_users() const;
  void validate() const;
};

struct SoftOutput {
  Vector soft;  // pre-slicer statistic per real dimension, scaled as an estimate of x
  Vector llr;   // positive favors +1
  MacCounter macs;
};

/// Complex: the conventional complex-linear filter, blind to a real-valued
/// alphabet. Real: the filter over the active real dimensions only (widely
/// linear for BPSK). The two coincide for QPSK.
enum class LinearDomain { Complex, Real };

enum class LinearFilter { Zf, Mmse };

struct SicOptions {
  LinearFilter filter = LinearFilter::Mmse;
  LinearDomain domain = LinearDomain::Complex;
  bool soft_cancel = false;  // cancel tanh(llr/2) instead of the hard decision
};

struct SicOutput {
  Vector hard;
  SoftOutput out;
  std::vector<int> order;  // users in detection order
};

/// Sign of the self-interference term in the tanh argument. Cancel adds back
/// diag(H^T H) m, which recovers classical soft PIC when the memory term is
/// off. Literal subtracts diag(H^T H) m instead, the other sign reading.
enum class SelfTerm { Cancel, Literal };

struct IterativeOptions {
  int t_max = 10;
  bool onsager = true;
  SelfTerm self_term = SelfTerm::Cancel;
  bool record_trajectory = false;
  // Stop once ||m^{t+1} - m^t||_inf drops below this; 0 disables.
  double early_exit_tol = 0.0;
};

struct IterativeState {
  Vector m;  // soft symbols after update t
  Vector z;  // residual used to produce m
  Vector o;  // memory term carried into the next residual
  int t = 0;
};

struct IterativeOutput {
  std::vector<IterativeState> trajectory;  // one entry per completed iteration
  IterativeState final;
  SoftOutput out;  // u = d.*m + H^T z at the last update: soft = u ./ d, llr = (4/sigma2) u
  int iterations = 0;
  double last_step = 0.0;  // ||m^T - m^{T-1}||_inf
};

SoftOutput matched_filter(const DetectorInput& in);
SoftOutput zf_detect(const DetectorInput& in, LinearDomain domain = LinearDomain::Complex);
SoftOutput mmse_detect(const DetectorInput& in, LinearDomain domain = LinearDomain::Complex);
SoftOutput linear_detect(const DetectorInput& in, LinearFilter filter, LinearDomain domain);
SicOutput sic_detect(const DetectorInput& in, const SicOptions& opts = {});

IterativeOutput soft_pic(const DetectorInput& in, int t_max, bool record_trajectory = false);
IterativeOutput m_blast(const DetectorInput& in, const IterativeOptions& opts = {});

/// beta (1 - <m^2>); below 1 the memory term keeps the iteration contractive.
double convergence_factor(double beta, const Vector& m);

/// Elementwise sign with sign(0) = +1.
Vector hard_decision(const Vector& m);

/// LLR of a +-1 symbol whose posterior mean is tanh(arg).
inline double llr_from_tanh_argument(double arg) { return 2.0 * arg; }

// ---------------------------------------------------------------------------
// Uniform dispatch used by the simulation engine.

enum class DetectorKind { MatchedFilter, Zf, Mmse, ZfSic, MmseSic, Pic, MBlast };

std::string to_string(DetectorKind k);
DetectorKind detector_kind_from_string(const std::string& s);
bool is_iterative(DetectorKind k);

struct DetectorSpec {
  DetectorKind kind = DetectorKind::Mmse;
  int iterations = 10;
  LinearDomain domain = LinearDomain::Complex;
  SelfTerm self_term = SelfTerm::Cancel;
  bool soft_cancel = false;
  std::string label;  // defaults to the kind name

  std::string name() const;
};

struct Detection {
  Vector hard;
  SoftOutput out;
  std::vector<Vector> hard_per_iteration;  // iterative kinds, when requested
};

Detection run_detector(const DetectorSpec& spec, const DetectorInput& in,
                       bool record_iterations = false);

// ---------------------------------------------------------------------------
// Post-detection SINR from a pre-slicer statistic gathered over many trials.

inline constexpr double kSinrCap = 1e12;

class SinrAccumulator {
 public:
  SinrAccumulator(int num_users, Constellation c);

  void add(const Vector& statistic, const Vector& x_true);
  void merge(const SinrAccumulator& other);

  std::int64_t trials() const { return trials_; }
  /// Per-user SINR (linear, complex-symbol normalization), capped at
  /// kSinrCap. Throws EstimationError below `min_trials`.
  std::vector<double> sinr(std::int64_t min_trials) const;

 private:
  int users_;
  Constellation constellation_;
  std::int64_t trials_ = 0;
  // Per user: sum stat*conj(x) (re, im), sum |x|^2, sum |stat|^2.
  std::vector<double> cross_re_, cross_im_, energy_x_, energy_s_;
};

}  // namespace mblast
