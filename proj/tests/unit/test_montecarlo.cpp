#include <doctest.h>

#include "mblast/montecarlo.hpp"
#include "mblast/report.hpp"
#include "mblast/stats.hpp"

using namespace mblast;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.num_users = 4;
  cfg.num_rx = 16;
  cfg.detectors = {{.kind = DetectorKind::Mmse}, {.kind = DetectorKind::Pic, .iterations = 4},
                   {.kind = DetectorKind::MBlast, .iterations = 4}};
  cfg.eb_n0_db = {0.0, 3.0};
  cfg.stop.min_errors = 20;
  cfg.stop.max_bits = 20000;
  cfg.stop.batch_trials = 8;
  cfg.seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("noise variance follows the Eb/N0 accounting") {
  ExperimentConfig cfg = small_config();
  CHECK(cfg.sigma2_for_eb_n0(0.0) == doctest::Approx(1.0));
  CHECK(cfg.sigma2_for_eb_n0(10.0) == doctest::Approx(0.1));
  cfg.constellation = Constellation::Qpsk;
  CHECK(cfg.sigma2_for_eb_n0(0.0) == doctest::Approx(1.0));
  cfg.coding = CodingSpec{};
  CHECK(cfg.sigma2_for_eb_n0(0.0) == doctest::Approx(2.0));
}

TEST_CASE("config validation") {
  auto cfg = small_config();
  CHECK_NOTHROW(cfg.validate());
  cfg.num_rx = 4;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("load"), ConfigError);
  cfg = small_config();
  cfg.eb_n0_db.clear();
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.detectors.push_back({.kind = DetectorKind::Mmse});
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.stop.min_errors = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("noiseless ZF makes no errors") {
  ExperimentConfig cfg;
  cfg.num_users = 3;
  cfg.num_rx = 8;
  cfg.detectors = {{.kind = DetectorKind::Zf}};
  cfg.eb_n0_db = {300.0};
  cfg.stop.min_errors = 1;
  cfg.stop.max_trials = 1;
  auto r = run_ber_sweep(cfg);
  CHECK(r.curves[0].points[0].trials == 1);
  CHECK(r.curves[0].points[0].errors == 0);
  CHECK(r.curves[0].points[0].ber == 0.0);
}

TEST_CASE("sweep accounting and stop rule") {
  auto cfg = small_config();
  auto r = run_ber_sweep(cfg);
  REQUIRE(r.curves.size() == 3);
  for (const auto& c : r.curves) {
    CHECK(c.points.size() == 2);
    for (const auto& p : c.points) {
      CHECK(p.bits == p.trials * cfg.num_users);
      CHECK(p.errors <= p.bits);
      CHECK(p.ber == static_cast<double>(p.errors) / static_cast<double>(p.bits));
      CHECK(p.trials % cfg.stop.batch_trials == 0);
      CHECK(p.ci_low <= p.ber);
      CHECK(p.ber <= p.ci_high);
    }
  }
  // every detector sees the same realizations, so trial counts agree
  for (std::size_t g = 0; g < 2; ++g) {
    CHECK(r.curves[0].points[g].trials == r.curves[2].points[g].trials);
    const bool all_done = r.curves[0].points[g].errors >= 20 && r.curves[1].points[g].errors >= 20 &&
                          r.curves[2].points[g].errors >= 20;
    CHECK((all_done || r.curves[0].points[g].bits >= cfg.stop.max_bits));
  }
  CHECK(r.curves[2].points[0].macs_per_detection == 4ull * 2 * 4 * 32 + 4 * 32 + 4 * (4 + 32 + 4));
}

TEST_CASE("results do not depend on the worker count") {
  auto cfg = small_config();
  cfg.workers = 1;
  auto a = run_ber_sweep(cfg);
  cfg.workers = 3;
  auto b = run_ber_sweep(cfg);
  for (std::size_t d = 0; d < a.curves.size(); ++d) {
    for (std::size_t g = 0; g < a.curves[d].points.size(); ++g) {
      CHECK(a.curves[d].points[g].errors == b.curves[d].points[g].errors);
      CHECK(a.curves[d].points[g].bits == b.curves[d].points[g].bits);
    }
  }
  auto ca = run_convergence_study(cfg, 4.0);
  cfg.workers = 1;
  auto cb = run_convergence_study(cfg, 4.0);
  REQUIRE(ca.rows.size() == cb.rows.size());
  for (std::size_t i = 0; i < ca.rows.size(); ++i) CHECK(ca.rows[i].errors == cb.rows[i].errors);
}

TEST_CASE("convergence study shares the first iterate") {
  auto cfg = small_config();
  auto r = run_convergence_study(cfg, 4.0);
  CHECK(r.row("pic", 1).errors == r.row("mblast", 1).errors);
  CHECK(r.pair("mblast", "pic", 1).a_only == 0);
  CHECK(r.pair("mblast", "pic", 1).b_only == 0);
  CHECK(r.row("mmse", 0).bits == r.row("mblast", 4).bits);
  CHECK_THROWS(r.row("mmse", 1));
  // 1 + 4 + 4 rows
  CHECK(r.rows.size() == 9);

  auto one_shot = small_config();
  one_shot.detectors = {{.kind = DetectorKind::Mmse}};
  CHECK_THROWS_AS(run_convergence_study(one_shot, 4.0), ConfigError);
}

TEST_CASE("coded sweep runs and beats uncoded transmission") {
  auto cfg = small_config();
  cfg.detectors = {{.kind = DetectorKind::Mmse}};
  cfg.eb_n0_db = {3.0};
  cfg.stop.max_trials = 2000;
  cfg.stop.min_errors = 1000000;
  auto uncoded = run_ber_sweep(cfg);
  cfg.stop.max_trials = 16;
  cfg.coding = CodingSpec{};
  cfg.coding->block_length = 64;
  auto coded = run_ber_sweep(cfg);
  CHECK(coded.curves[0].points[0].bits == 16 * 4 * 64);
  CHECK(coded.curves[0].points[0].ber < uncoded.curves[0].points[0].ber);
  cfg.coding->interleave = true;
  auto inter = run_ber_sweep(cfg);
  CHECK(inter.curves[0].points[0].bits == coded.curves[0].points[0].bits);
}

TEST_CASE("single-user SINR equals the input SNR") {
  ExperimentConfig cfg;
  cfg.num_users = 1;
  cfg.num_rx = 1;
  cfg.fading = FadingModel::Awgn;
  cfg.detectors = {{.kind = DetectorKind::MatchedFilter}, {.kind = DetectorKind::Mmse},
                   {.kind = DetectorKind::MBlast, .iterations = 3}};
  cfg.eb_n0_db = {0.0};
  cfg.stop.max_trials = 20000;
  auto curves = run_sinr_study(cfg, {0.0, 6.0});
  for (std::size_t d = 0; d < 2; ++d) {
    for (const auto& p : curves[d].points) CHECK(p.sinr_db == doctest::Approx(p.snr_db).epsilon(0.05));
  }
}

TEST_CASE("MMSE SINR is at least ZF SINR") {
  auto cfg = small_config();
  cfg.num_users = 8;
  cfg.num_rx = 12;
  cfg.detectors = {{.kind = DetectorKind::Zf}, {.kind = DetectorKind::Mmse}};
  cfg.stop.max_trials = 400;
  auto curves = run_sinr_study(cfg, {0.0, 5.0, 10.0});
  for (std::size_t g = 0; g < 3; ++g) CHECK(curves[1].points[g].sinr_db >= curves[0].points[g].sinr_db);
}

TEST_CASE("throughput pipeline: M-BLAST gains over MMSE at the 90th percentile") {
  ExperimentConfig cfg;
  cfg.num_users = 32;
  cfg.num_rx = 96;
  cfg.detectors = {{.kind = DetectorKind::Mmse}, {.kind = DetectorKind::MBlast, .iterations = 10}};
  cfg.eb_n0_db = {0.0};
  cfg.stop.max_trials = 128;
  auto curves = run_sinr_study(cfg, {6.0, 9.0, 12.0, 15.0});
  auto cdf = load_cdf(std::string(MBLAST_SOURCE_DIR) + "/data/synthetic_cellular_cdf.csv");
  auto rows = throughput_table(to_transfer_curves(curves), "mblast", {cdf}, {90});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].gain_pct > 0.0);
}
