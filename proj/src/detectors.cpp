#include "mblast/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mblast/channel.hpp"

namespace mblast {

MacCounter& MacCounter::operator+=(const MacCounter& o) {
  gram += o.gram;
  factor += o.factor;
  matvec += o.matvec;
  other += o.other;
  tanh += o.tanh;
  return *this;
}

int DetectorInput::num_users() const {
  return constellation == Constellation::Bpsk ? static_cast<int>(H.cols())
                                              : static_cast<int>(H.cols() / 2);
}

void DetectorInput::validate() const {
  if (H.rows() != y.size()) throw DimensionError("received vector does not match channel rows");
  if (H.rows() % 2 != 0) throw DimensionError("real model must have an even row count");
  if (constellation == Constellation::Qpsk && H.cols() % 2 != 0) {
    throw DimensionError("QPSK real model must have an even column count");
  }
  if (!(sigma2 > 0.0)) throw std::invalid_argument("noise variance estimate must be positive");
}

namespace {

using u64 = std::uint64_t;

struct FilterSolution {
  Vector estimate;  // (G + lambda I)^-1 H^T y
  Vector phi_diag;  // diag((G + lambda I)^-1)
};

// Solves the regularized normal equations through a Cholesky factor. The MAC
// tally follows the dense model: n^2 N for the Gram matrix, n^3 for the
// factorization plus inverse, n N + n^2 for the filter application.
FilterSolution solve_filter(const Matrix& H, const Eigen::Ref<const Vector>& y, double lambda,
                            MacCounter& macs) {
  const u64 n = static_cast<u64>(H.cols());
  const u64 N = static_cast<u64>(H.rows());
  Matrix G = Matrix::Zero(H.cols(), H.cols());
  G.selfadjointView<Eigen::Lower>().rankUpdate(H.transpose());
  G = G.selfadjointView<Eigen::Lower>();
  G.diagonal().array() += lambda;
  macs.gram += n * n * N;

  Eigen::LLT<Matrix> llt(G);
  const double scale = std::max(G.diagonal().maxCoeff(), 1e-300);
  if (llt.info() != Eigen::Success ||
      llt.matrixLLT().diagonal().array().square().minCoeff() < 1e-13 * scale) {
    throw SingularMatrixError("Gram matrix is singular to working precision");
  }
  const Matrix phi = llt.solve(Matrix::Identity(H.cols(), H.cols()));
  macs.factor += n * n * n;

  const Vector r = H.transpose() * y;
  macs.matvec += n * N + n * n;
  return {phi * r, phi.diagonal()};
}

struct LinearSetup {
  Matrix H;            // matrix the filter is built on
  double prior = 1.0;  // nominal per-dimension symbol variance
};

LinearSetup linear_setup(const DetectorInput& in, LinearDomain domain) {
  if (domain == LinearDomain::Complex && in.constellation == Constellation::Bpsk) {
    return {complete_lift(Matrix(in.H)), 0.5};
  }
  return {Matrix(in.H), 1.0};
}

double regularizer(LinearFilter f, double noise_per_dim, double prior) {
  return f == LinearFilter::Mmse ? noise_per_dim / prior : 0.0;
}

}  // namespace

SoftOutput matched_filter(const DetectorInput& in) {
  in.validate();
  SoftOutput out;
  const Vector r = in.H.transpose() * in.y;
  out.llr = (4.0 / in.sigma2) * r;
  out.soft = r.cwiseQuotient(in.H.colwise().squaredNorm().transpose());
  out.macs.matvec = static_cast<u64>(in.H.rows()) * static_cast<u64>(in.H.cols());
  return out;
}

SoftOutput linear_detect(const DetectorInput& in, LinearFilter filter, LinearDomain domain) {
  in.validate();
  const auto setup = linear_setup(in, domain);
  const double v = in.sigma2 / 2.0;
  SoftOutput out;
  auto sol = solve_filter(setup.H, in.y, regularizer(filter, v, setup.prior), out.macs);
  const auto n = in.H.cols();
  out.soft = sol.estimate.head(n);
  // Unbiased-equivalent LLR: 2 xhat / (v phi_ii) for both filters.
  out.llr = (2.0 * out.soft.array() / (v * sol.phi_diag.head(n).array())).matrix();
  return out;
}

SoftOutput zf_detect(const DetectorInput& in, LinearDomain domain) {
  return linear_detect(in, LinearFilter::Zf, domain);
}

SoftOutput mmse_detect(const DetectorInput& in, LinearDomain domain) {
  return linear_detect(in, LinearFilter::Mmse, domain);
}

SicOutput sic_detect(const DetectorInput& in, const SicOptions& opts) {
  in.validate();
  const auto setup = linear_setup(in, opts.domain);
  const int K = in.num_users();
  const auto n_active = in.H.cols();
  const auto full_cols = setup.H.cols();
  const double v = in.sigma2 / 2.0;
  const double lambda = regularizer(opts.filter, v, setup.prior);
  const u64 N = static_cast<u64>(setup.H.rows());

  // Columns of the filter matrix owned by each user, and the subset of them
  // that carry data (the imaginary column of a BPSK user carries zero).
  const bool paired = full_cols != K;
  auto columns_of = [&](int k) {
    return paired ? std::vector<Eigen::Index>{k, k + K} : std::vector<Eigen::Index>{k};
  };
  auto data_columns_of = [&](int k) {
    if (in.constellation == Constellation::Qpsk) return std::vector<Eigen::Index>{k, k + K};
    return std::vector<Eigen::Index>{k};
  };

  SicOutput result;
  result.hard = Vector::Zero(n_active);
  result.out.soft = Vector::Zero(n_active);
  result.out.llr = Vector::Zero(n_active);

  std::vector<int> remaining(K);
  std::iota(remaining.begin(), remaining.end(), 0);
  Vector residual = in.y;

  while (!remaining.empty()) {
    std::vector<Eigen::Index> cols;
    for (int k : remaining) {
      for (auto c : columns_of(k)) cols.push_back(c);
    }
    Matrix Hr(setup.H.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) Hr.col(j) = setup.H.col(cols[j]);
    auto sol = solve_filter(Hr, residual, lambda, result.out.macs);

    auto local_index = [&](Eigen::Index col) {
      return static_cast<Eigen::Index>(std::find(cols.begin(), cols.end(), col) - cols.begin());
    };

    // Maximal post-detection SNR = minimal filtered error variance.
    std::size_t best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < remaining.size(); ++r) {
      double err = 0.0;
      for (auto c : columns_of(remaining[r])) err += sol.phi_diag[local_index(c)];
      if (err < best_err) {
        best_err = err;
        best = r;
      }
    }
    const int user = remaining[best];
    for (auto c : data_columns_of(user)) {
      const auto j = local_index(c);
      const double stat = sol.estimate[j];
      const double llr = 2.0 * stat / (v * sol.phi_diag[j]);
      const double hard = stat >= 0.0 ? 1.0 : -1.0;
      result.hard[c] = hard;
      result.out.soft[c] = stat;
      result.out.llr[c] = llr;
      const double cancel = opts.soft_cancel ? std::tanh(llr / 2.0) : hard;
      residual -= cancel * setup.H.col(c);
      result.out.macs.other += N;
    }
    result.order.push_back(user);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return result;
}

IterativeOutput m_blast(const DetectorInput& in, const IterativeOptions& opts) {
  in.validate();
  if (opts.t_max < 1) throw std::invalid_argument("iteration count must be at least 1");
  const auto& H = in.H;
  const u64 n = static_cast<u64>(H.cols());
  const u64 N = static_cast<u64>(H.rows());
  const double scale = 2.0 / in.sigma2;
  const double self_sign = opts.self_term == SelfTerm::Cancel ? 1.0 : -1.0;

  IterativeOutput result;
  auto& macs = result.out.macs;
  const Vector d = H.colwise().squaredNorm().transpose();
  macs.other += n * N;

  Vector m = Vector::Zero(H.cols());
  Vector o = Vector::Zero(H.rows());
  Vector z(H.rows());
  Vector u(H.cols());

  for (int t = 0; t < opts.t_max; ++t) {
    z.noalias() = in.y - H * m;
    z += o;
    u.noalias() = H.transpose() * z;
    u += self_sign * d.cwiseProduct(m);
    macs.matvec += 2 * n * N;
    macs.other += n;

    Vector m_next = (scale * u).array().tanh().matrix();
    macs.tanh += n;
    if (opts.onsager) {
      o = (in.beta * (1.0 - m_next.squaredNorm() / static_cast<double>(n))) * z;
      macs.other += N + n;
    }
    result.last_step = (m_next - m).cwiseAbs().maxCoeff();
    m = std::move(m_next);
    ++result.iterations;
    if (opts.record_trajectory) result.trajectory.push_back({m, z, o, t + 1});
    if (opts.early_exit_tol > 0.0 && result.last_step < opts.early_exit_tol) break;
  }

  result.final = {m, z, o, result.iterations};
  // Per-user gain normalization turns u into m + H^T z / d, an estimate of x
  // whose scale does not fluctuate with the channel draw.
  result.out.soft = u.cwiseQuotient(d);
  result.out.llr = llr_from_tanh_argument(1.0) * scale * u;
  return result;
}

IterativeOutput soft_pic(const DetectorInput& in, int t_max, bool record_trajectory) {
  IterativeOptions opts;
  opts.t_max = t_max;
  opts.onsager = false;
  opts.record_trajectory = record_trajectory;
  return m_blast(in, opts);
}

double convergence_factor(double beta, const Vector& m) {
  return beta * (1.0 - m.squaredNorm() / static_cast<double>(m.size()));
}

Vector hard_decision(const Vector& m) {
  return m.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
}

// ---------------------------------------------------------------------------

std::string to_string(DetectorKind k) {
  switch (k) {
    case DetectorKind::MatchedFilter: return "mf";
    case DetectorKind::Zf: return "zf";
    case DetectorKind::Mmse: return "mmse";
    case DetectorKind::ZfSic: return "zf-sic";
    case DetectorKind::MmseSic: return "mmse-sic";
    case DetectorKind::Pic: return "pic";
    case DetectorKind::MBlast: return "mblast";
  }
  return "?";
}

DetectorKind detector_kind_from_string(const std::string& s) {
  for (auto k : {DetectorKind::MatchedFilter, DetectorKind::Zf, DetectorKind::Mmse,
                 DetectorKind::ZfSic, DetectorKind::MmseSic, DetectorKind::Pic,
                 DetectorKind::MBlast}) {
    if (to_string(k) == s) return k;
  }
  if (s == "m-blast") return DetectorKind::MBlast;
  if (s == "v-blast") return DetectorKind::MmseSic;
  throw ConfigError("unknown detector '" + s + "'");
}

bool is_iterative(DetectorKind k) { return k == DetectorKind::Pic || k == DetectorKind::MBlast; }

std::string DetectorSpec::name() const { return label.empty() ? to_string(kind) : label; }

Detection run_detector(const DetectorSpec& spec, const DetectorInput& in, bool record_iterations) {
  Detection det;
  switch (spec.kind) {
    case DetectorKind::MatchedFilter:
      det.out = matched_filter(in);
      det.hard = hard_decision(det.out.soft);
      break;
    case DetectorKind::Zf:
    case DetectorKind::Mmse:
      det.out = linear_detect(in, spec.kind == DetectorKind::Zf ? LinearFilter::Zf : LinearFilter::Mmse,
                              spec.domain);
      det.hard = hard_decision(det.out.soft);
      break;
    case DetectorKind::ZfSic:
    case DetectorKind::MmseSic: {
      SicOptions opts;
      opts.filter = spec.kind == DetectorKind::ZfSic ? LinearFilter::Zf : LinearFilter::Mmse;
      opts.domain = spec.domain;
      opts.soft_cancel = spec.soft_cancel;
      auto sic = sic_detect(in, opts);
      det.hard = std::move(sic.hard);
      det.out = std::move(sic.out);
      break;
    }
    case DetectorKind::Pic:
    case DetectorKind::MBlast: {
      IterativeOptions opts;
      opts.t_max = spec.iterations;
      opts.onsager = spec.kind == DetectorKind::MBlast;
      opts.self_term = spec.self_term;
      opts.record_trajectory = record_iterations;
      auto it = m_blast(in, opts);
      det.hard = hard_decision(it.final.m);
      if (record_iterations) {
        for (const auto& s : it.trajectory) det.hard_per_iteration.push_back(hard_decision(s.m));
      }
      det.out = std::move(it.out);
      break;
    }
  }
  return det;
}

// ---------------------------------------------------------------------------

SinrAccumulator::SinrAccumulator(int num_users, Constellation c)
    : users_(num_users),
      constellation_(c),
      cross_re_(num_users, 0.0),
      cross_im_(num_users, 0.0),
      energy_x_(num_users, 0.0),
      energy_s_(num_users, 0.0) {}

void SinrAccumulator::add(const Vector& statistic, const Vector& x_true) {
  const int dims = constellation_ == Constellation::Bpsk ? users_ : 2 * users_;
  if (statistic.size() != dims || x_true.size() != dims) {
    throw DimensionError("SINR statistic does not match the user count");
  }
  for (int k = 0; k < users_; ++k) {
    const double sr = statistic[k];
    const double xr = x_true[k];
    const double si = constellation_ == Constellation::Qpsk ? statistic[k + users_] : 0.0;
    const double xi = constellation_ == Constellation::Qpsk ? x_true[k + users_] : 0.0;
    // s * conj(x)
    cross_re_[k] += sr * xr + si * xi;
    cross_im_[k] += si * xr - sr * xi;
    energy_x_[k] += xr * xr + xi * xi;
    energy_s_[k] += sr * sr + si * si;
  }
  ++trials_;
}

void SinrAccumulator::merge(const SinrAccumulator& other) {
  if (other.users_ != users_ || other.constellation_ != constellation_) {
    throw DimensionError("cannot merge SINR accumulators of different shapes");
  }
  for (int k = 0; k < users_; ++k) {
    cross_re_[k] += other.cross_re_[k];
    cross_im_[k] += other.cross_im_[k];
    energy_x_[k] += other.energy_x_[k];
    energy_s_[k] += other.energy_s_[k];
  }
  trials_ += other.trials_;
}

std::vector<double> SinrAccumulator::sinr(std::int64_t min_trials) const {
  if (trials_ < min_trials || trials_ < 2) {
    throw EstimationError("SINR estimate needs at least " + std::to_string(std::max<std::int64_t>(min_trials, 2)) +
                          " trials, have " + std::to_string(trials_));
  }
  std::vector<double> out(users_);
  for (int k = 0; k < users_; ++k) {
    const double c2 = cross_re_[k] * cross_re_[k] + cross_im_[k] * cross_im_[k];
    const double signal = c2 / energy_x_[k];
    double residual = energy_s_[k] - signal;
    // A real-valued statistic carries one of the two noise dimensions of a
    // complex symbol; double it to report the complex-equivalent SINR.
    if (constellation_ == Constellation::Bpsk) residual *= 2.0;
    double value = residual > 0.0 ? signal / residual : kSinrCap;
    if (!(value < kSinrCap)) value = kSinrCap;
    out[k] = value;
  }
  return out;
}

}  // namespace mblast
