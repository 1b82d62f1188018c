#include <doctest.h>

#include <cmath>

#include "mblast/channel.hpp"
#include "mblast/detectors.hpp"

using namespace mblast;

namespace {

struct Instance {
  Matrix H;
  Vector x;
  Vector y;
  double sigma2;
  double beta;
};

Instance make_instance(int K, int M, double sigma2, std::uint64_t seed,
                       Constellation c = Constellation::Bpsk) {
  auto rng = substream(seed, {77});
  auto ch = generate_channel(K, M, rng);
  Matrix H = active_columns(lift_to_real(ch, PowerProfile::equal(K)), c);
  Vector x = random_symbols(static_cast<int>(H.cols()), rng);
  Vector y = transmit(H, x, sigma2, rng);
  return {H, x, y, sigma2, static_cast<double>(K) / M};
}

DetectorInput input_of(const Instance& s, Constellation c = Constellation::Bpsk) {
  return {s.H, s.y, s.sigma2, s.beta, c};
}

// Classical soft PIC written out per user, no shared code with the detector.
Vector pic_step(const Matrix& H, const Vector& y, const Vector& m, double sigma2) {
  Vector next(m.size());
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    Vector r = y;
    for (Eigen::Index j = 0; j < m.size(); ++j) {
      if (j != i) r -= H.col(j) * m(j);
    }
    next(i) = std::tanh(2.0 / sigma2 * H.col(i).dot(r));
  }
  return next;
}

// Exhaustive posterior mean over {+-1}^n with noise variance sigma2/2 per
// real component.
Vector posterior_mean(const Matrix& H, const Vector& y, double sigma2) {
  const auto n = H.cols();
  Vector num = Vector::Zero(n);
  std::vector<double> logw;
  std::vector<Vector> xs;
  for (long bits = 0; bits < (1L << n); ++bits) {
    Vector x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = (bits >> i) & 1 ? -1.0 : 1.0;
    logw.push_back(-(y - H * x).squaredNorm() / sigma2);
    xs.push_back(x);
  }
  const double mx = *std::max_element(logw.begin(), logw.end());
  double den = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double w = std::exp(logw[k] - mx);
    num += w * xs[k];
    den += w;
  }
  return num / den;
}

}  // namespace

TEST_CASE("orthonormal channel: matched filter, ZF and MMSE agree") {
  auto rng = substream(1, {});
  Matrix A = Matrix::Random(16, 4);
  Eigen::HouseholderQR<Matrix> qr(A);
  Matrix Q = qr.householderQ() * Matrix::Identity(16, 4);
  Vector x(4);
  x << 1, -1, -1, 1;
  const double sigma2 = 0.5;
  Vector y = transmit(Q, x, sigma2, rng);
  DetectorInput in{Q, y, sigma2, 0.25};
  auto mf = matched_filter(in);
  auto zf = zf_detect(in, LinearDomain::Real);
  auto mmse = mmse_detect(in, LinearDomain::Real);
  CHECK(zf.soft.isApprox(mf.soft, 1e-12));
  CHECK(hard_decision(mmse.soft) == hard_decision(mf.soft));
  // with orthonormal columns every filter's LLR collapses to 4 H^T y / sigma2
  CHECK(mmse.llr.isApprox(mf.llr, 1e-10));
  CHECK(zf.llr.isApprox(mf.llr, 1e-10));
  CHECK(mf.llr.isApprox(4.0 / sigma2 * Q.transpose() * y));
}

TEST_CASE("ZF inverts a noiseless channel") {
  for (auto c : {Constellation::Bpsk, Constellation::Qpsk}) {
    auto s = make_instance(6, 12, 1e-30, 2, c);
    s.y = s.H * s.x;
    for (auto d : {LinearDomain::Real, LinearDomain::Complex}) {
      auto out = zf_detect(input_of(s, c), d);
      CHECK((out.soft - s.x).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("complex-linear MMSE on BPSK matches the explicit full-lift filter") {
  auto s = make_instance(4, 10, 0.3, 3);
  Matrix F = complete_lift(s.H);
  const double v = s.sigma2 / 2.0;
  // per-dimension prior 1/2 on the full lift
  Matrix G = F.transpose() * F + (v / 0.5) * Matrix::Identity(8, 8);
  Vector ref = G.inverse() * F.transpose() * s.y;
  auto out = mmse_detect(input_of(s), LinearDomain::Complex);
  CHECK(out.soft.isApprox(ref.head(4), 1e-10));
  Vector ref_real = (s.H.transpose() * s.H + v * Matrix::Identity(4, 4)).inverse() * s.H.transpose() * s.y;
  CHECK(mmse_detect(input_of(s), LinearDomain::Real).soft.isApprox(ref_real, 1e-10));
}

TEST_CASE("singular Gram matrix is reported") {
  Matrix H = Matrix::Zero(4, 2);
  H.col(0) << 1, 0, 0, 0;
  H.col(1) << 2, 0, 0, 0;
  Vector y = Vector::Ones(4);
  DetectorInput in{H, y, 0.1, 0.5};
  CHECK_THROWS_AS(zf_detect(in, LinearDomain::Real), SingularMatrixError);
  CHECK_NOTHROW(mmse_detect(in, LinearDomain::Real));
}

TEST_CASE("single-user SIC equals the linear detector") {
  auto s = make_instance(1, 8, 0.4, 4);
  for (auto d : {LinearDomain::Real, LinearDomain::Complex}) {
    auto lin = mmse_detect(input_of(s), d);
    auto sic = sic_detect(input_of(s), {LinearFilter::Mmse, d, false});
    CHECK(sic.out.soft.isApprox(lin.soft));
    CHECK(sic.out.llr.isApprox(lin.llr));
    CHECK(sic.order == std::vector<int>{0});
  }
}

TEST_CASE("SIC detects every user once, noiseless input is recovered") {
  auto s = make_instance(6, 16, 1e-8, 5, Constellation::Qpsk);
  s.y = s.H * s.x;
  for (bool soft : {false, true}) {
    auto out = sic_detect(input_of(s, Constellation::Qpsk), {LinearFilter::Zf, LinearDomain::Real, soft});
    auto order = out.order;
    std::sort(order.begin(), order.end());
    CHECK(order == std::vector<int>{0, 1, 2, 3, 4, 5});
    CHECK(out.hard == s.x);
  }
}

TEST_CASE("SIC picks the strongest user first") {
  auto s = make_instance(3, 12, 0.2, 6);
  s.H.col(1) *= 5.0;
  s.y = s.H * s.x;
  auto out = sic_detect(input_of(s), {LinearFilter::Mmse, LinearDomain::Real, false});
  CHECK(out.order.front() == 1);
}

TEST_CASE("soft PIC follows the classical per-user update") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto s = make_instance(8, 24, 0.5, 10 + seed);
    auto out = soft_pic(input_of(s), 6, true);
    REQUIRE(out.trajectory.size() == 6);
    Vector m = Vector::Zero(8);
    for (int t = 0; t < 6; ++t) {
      m = pic_step(s.H, s.y, m, s.sigma2);
      CHECK((out.trajectory[t].m - m).cwiseAbs().maxCoeff() < 1e-12);
    }
    // first iterate from zero state is tanh(2/sigma2 H^T y)
    Vector first = (2.0 / s.sigma2 * s.H.transpose() * s.y).array().tanh().matrix();
    CHECK((out.trajectory[0].m - first).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("memory term off reduces M-BLAST to soft PIC bit for bit") {
  auto s = make_instance(12, 40, 0.3, 20);
  IterativeOptions opts;
  opts.t_max = 10;
  opts.onsager = false;
  opts.record_trajectory = true;
  auto a = m_blast(input_of(s), opts);
  auto b = soft_pic(input_of(s), 10, true);
  for (std::size_t t = 0; t < a.trajectory.size(); ++t) CHECK(a.trajectory[t].m == b.trajectory[t].m);
  CHECK(a.out.llr == b.out.llr);
}

TEST_CASE("M-BLAST first iterate equals PIC first iterate; memory term enters later") {
  auto s = make_instance(8, 32, 0.5, 21);
  IterativeOptions opts;
  opts.t_max = 3;
  opts.record_trajectory = true;
  auto mb = m_blast(input_of(s), opts);
  auto pic = soft_pic(input_of(s), 3, true);
  CHECK(mb.trajectory[0].m == pic.trajectory[0].m);
  CHECK(mb.trajectory[0].o.isApprox(s.beta * (1.0 - mb.trajectory[0].m.squaredNorm() / 8.0) * mb.trajectory[0].z));
  CHECK(mb.trajectory[1].m != pic.trajectory[1].m);
}

TEST_CASE("converged M-BLAST satisfies its fixed-point equation") {
  auto s = make_instance(8, 64, 1.0, 22);
  IterativeOptions opts;
  opts.t_max = 400;
  opts.early_exit_tol = 1e-14;
  auto out = m_blast(input_of(s), opts);
  REQUIRE(out.last_step < 1e-12);
  const Vector& m = out.final.m;
  const double q = m.squaredNorm() / m.size();
  const double c = 1.0 / (1.0 - s.beta * (1.0 - q));
  const Vector d = s.H.colwise().squaredNorm().transpose();
  // At a fixed point z = c (y - H m), hence m = tanh(2/sigma2 (c H^T (y - H m) + d m)).
  Vector arg = 2.0 / s.sigma2 * (c * s.H.transpose() * (s.y - s.H * m) + d.cwiseProduct(m));
  Vector rhs = arg.array().tanh().matrix();
  CHECK((m - rhs).cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("iterates stay in [-1, 1] and saturation switches the memory off") {
  auto s = make_instance(16, 48, 1.0, 23);
  IterativeOptions opts;
  opts.t_max = 10;
  opts.record_trajectory = true;
  for (const auto& st : m_blast(input_of(s), opts).trajectory) CHECK(st.m.cwiseAbs().maxCoeff() <= 1.0);
  Vector sat(4);
  sat << 1, -1, -1, 1;
  CHECK(convergence_factor(0.5, sat) == 0.0);
  CHECK(convergence_factor(0.5, Vector::Zero(4)) == 0.5);
}

TEST_CASE("sign symmetries") {
  auto s = make_instance(6, 20, 0.4, 24);
  IterativeOptions opts;
  opts.t_max = 8;
  auto base = m_blast(input_of(s), opts);

  Vector ny = -s.y;
  auto neg = m_blast({s.H, ny, s.sigma2, s.beta}, opts);
  CHECK(neg.final.m == -base.final.m);

  // flipping user 2's column flips only that user's estimate
  Matrix H2 = s.H;
  H2.col(2) *= -1.0;
  auto flip = m_blast({H2, s.y, s.sigma2, s.beta}, opts);
  Vector expect = base.final.m;
  expect(2) = -expect(2);
  CHECK(flip.final.m.isApprox(expect, 1e-12));
}

TEST_CASE("literal self-term differs from cancellation") {
  auto s = make_instance(6, 20, 0.4, 25);
  IterativeOptions a, b;
  a.t_max = b.t_max = 4;
  b.self_term = SelfTerm::Literal;
  CHECK(m_blast(input_of(s), a).final.m != m_blast(input_of(s), b).final.m);
}

TEST_CASE("converged M-BLAST agrees with the exhaustive posterior at high SNR") {
  int agree = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    auto s = make_instance(5, 20, db_to_linear(-8.0), 100 + seed);
    auto mb = m_blast(input_of(s), {.t_max = 30});
    Vector pm = posterior_mean(s.H, s.y, s.sigma2);
    agree += hard_decision(mb.final.m) == hard_decision(pm) ? 1 : 0;
    ++total;
  }
  CHECK(agree >= total * 95 / 100);
}

TEST_CASE("MAC tallies follow the dense model") {
  auto s = make_instance(8, 32, 0.5, 30);
  const std::uint64_t n = 8, N = 64;
  auto mb = m_blast(input_of(s), {.t_max = 5});
  CHECK(mb.out.macs.matvec == 5 * 2 * n * N);
  CHECK(mb.out.macs.tanh == 5 * n);

  auto mmse = mmse_detect(input_of(s), LinearDomain::Real);
  CHECK(mmse.macs.gram == n * n * N);
  CHECK(mmse.macs.factor == n * n * n);
  CHECK(mmse.macs.matvec == n * N + n * n);

  auto mf = matched_filter(input_of(s));
  CHECK(mf.macs.total() == n * N);

  // SIC: one Gram/factor/apply per stage over shrinking user sets
  auto sic = sic_detect(input_of(s), {LinearFilter::Mmse, LinearDomain::Real, false});
  std::uint64_t gram = 0, factor = 0;
  for (std::uint64_t k = 1; k <= n; ++k) {
    gram += k * k * N;
    factor += k * k * k;
  }
  CHECK(sic.out.macs.gram == gram);
  CHECK(sic.out.macs.factor == factor);
}

TEST_CASE("iterative LLRs are the scaled tanh argument") {
  auto s = make_instance(4, 16, 0.7, 31);
  auto out = m_blast(input_of(s), {.t_max = 3});
  Vector m_from_llr = (out.out.llr / 2.0).array().tanh().matrix();
  CHECK(m_from_llr.isApprox(out.final.m, 1e-12));
  CHECK(llr_from_tanh_argument(0.25) == 0.5);
}

TEST_CASE("input validation") {
  Matrix H = Matrix::Ones(4, 2);
  Vector y = Vector::Ones(3);
  CHECK_THROWS_AS(matched_filter({H, y, 1.0, 0.5}), DimensionError);
  Vector y4 = Vector::Ones(4);
  CHECK_THROWS(matched_filter({H, y4, 0.0, 0.5}));
  CHECK_THROWS(m_blast({H, y4, 1.0, 0.5}, {.t_max = 0}));
}

TEST_CASE("dispatch names and records per-iteration decisions") {
  CHECK(detector_kind_from_string("v-blast") == DetectorKind::MmseSic);
  CHECK(detector_kind_from_string("m-blast") == DetectorKind::MBlast);
  CHECK_THROWS_AS(detector_kind_from_string("ml"), ConfigError);
  auto s = make_instance(4, 16, 0.2, 32);
  DetectorSpec spec{.kind = DetectorKind::MBlast, .iterations = 4};
  auto det = run_detector(spec, input_of(s), true);
  CHECK(det.hard_per_iteration.size() == 4);
  CHECK(det.hard_per_iteration.back() == det.hard);
  CHECK(spec.name() == "mblast");
}

TEST_CASE("SINR accumulator") {
  SinrAccumulator acc(2, Constellation::Bpsk);
  auto rng = substream(40, {});
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  for (int t = 0; t < 20000; ++t) {
    Vector x = random_symbols(2, rng);
    Vector s(2);
    s << 2.0 * x(0) + g(rng), -x(1);
    acc.add(s, x);
  }
  auto sinr = acc.sinr(10);
  // signal 4, complex-equivalent noise 2 * 0.5
  CHECK(sinr[0] == doctest::Approx(4.0).epsilon(0.05));
  CHECK(sinr[1] == kSinrCap);

  SinrAccumulator q(1, Constellation::Qpsk), q2(1, Constellation::Qpsk);
  for (int t = 0; t < 4000; ++t) {
    Vector x = random_symbols(2, rng);
    Vector s = x + Vector{{g(rng), g(rng)}};
    (t % 2 ? q : q2).add(s, x);
  }
  q.merge(q2);
  CHECK(q.trials() == 4000);
  // |x|^2 = 2, noise 2 * 0.5
  CHECK(q.sinr(10)[0] == doctest::Approx(2.0).epsilon(0.06));
  SinrAccumulator few(1, Constellation::Bpsk);
  CHECK_THROWS_AS(few.sinr(10), EstimationError);
}

TEST_CASE("steps shrink when the convergence factor stays below one") {
  int shrinking = 0, guarded = 0;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto s = make_instance(16, 32, 0.3, 500 + seed);
    IterativeOptions opts;
    opts.t_max = 30;
    opts.record_trajectory = true;
    auto out = m_blast(input_of(s), opts);
    bool below = true;
    for (const auto& st : out.trajectory) below = below && convergence_factor(s.beta, st.m) < 1.0;
    if (!below) continue;
    ++guarded;
    const auto& tr = out.trajectory;
    const double early = (tr[4].m - tr[3].m).cwiseAbs().maxCoeff();
    const double late = (tr[29].m - tr[28].m).cwiseAbs().maxCoeff();
    shrinking += late <= early;
  }
  REQUIRE(guarded >= 50);
  CHECK(shrinking >= guarded * 9 / 10);
}
