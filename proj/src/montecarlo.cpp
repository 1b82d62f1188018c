#include "mblast/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "mblast/stats.hpp"

namespace mblast {

CsiConfig CsiSpec::resolve(double data_snr_linear) const {
  CsiConfig cfg;
  cfg.perfect = perfect;
  cfg.noise_var_mismatch = noise_var_mismatch;
  cfg.pilot_snr = pilot_snr_db ? db_to_linear(*pilot_snr_db) : data_snr_linear * db_to_linear(pilot_offset_db);
  return cfg;
}

double ExperimentConfig::sigma2_for_eb_n0(double eb_n0_db) const {
  return 1.0 / (code_rate() * db_to_linear(eb_n0_db));
}

void ExperimentConfig::validate() const {
  if (num_users < 1 || num_rx < 1) throw ConfigError("K and M must be positive");
  if (num_users >= num_rx && !(num_users == 1 && num_rx == 1)) {
    throw ConfigError("load K/M = " + std::to_string(num_users) + "/" + std::to_string(num_rx) +
                      " must be below 1");
  }
  if (detectors.empty()) throw ConfigError("at least one detector is required");
  for (const auto& d : detectors) {
    if (is_iterative(d.kind) && d.iterations < 1) {
      throw ConfigError("detector " + d.name() + ": iterations must be at least 1");
    }
  }
  for (std::size_t i = 0; i < detectors.size(); ++i) {
    for (std::size_t j = i + 1; j < detectors.size(); ++j) {
      if (detectors[i].name() == detectors[j].name()) {
        throw ConfigError("duplicate detector label '" + detectors[i].name() + "'");
      }
    }
  }
  if (eb_n0_db.empty()) throw ConfigError("Eb/N0 grid must be nonempty");
  if (stop.min_errors < 1) throw ConfigError("stop.min_errors must be at least 1");
  if (stop.max_bits < 1) throw ConfigError("stop.max_bits must be positive");
  if (stop.max_trials < 0) throw ConfigError("stop.max_trials must be nonnegative");
  if (stop.batch_trials < 1) throw ConfigError("stop.batch_trials must be positive");
  if (csi.noise_var_mismatch < 0.0 || csi.noise_var_mismatch >= 1.0) {
    throw ConfigError("csi.noise_var_mismatch must lie in [0, 1)");
  }
  if (workers < 0) throw ConfigError("workers must be nonnegative (0 selects all cores)");
  if (coding) {
    coding->code.validate();
    if (coding->block_length < 1) throw ConfigError("coding.block_length must be positive");
  }
  if (const auto* ln = std::get_if<LognormalPowers>(&power); ln && ln->std_db < 0.0) {
    throw ConfigError("power.std_db must be nonnegative");
  }
}

void parallel_for(std::int64_t begin, std::int64_t end, int workers,
                  const std::function<void(std::int64_t)>& fn) {
  const std::int64_t count = end - begin;
  if (count <= 0) return;
  if (workers < 1) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int threads = static_cast<int>(std::min<std::int64_t>(workers, count));
  if (threads == 1) {
    for (auto i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(threads);
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (auto i = begin + w; i < end; i += threads) fn(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

struct Link {
  Matrix H_true;  // active columns
  Matrix H_est;
  double sigma2 = 1.0;
  double sigma2_hat = 1.0;
};

Link draw_link(const ExperimentConfig& cfg, double sigma2, RandomEngine& rng) {
  const auto powers = generate_powers(cfg.num_users, cfg.power, rng);
  const auto ch = generate_channel(cfg.num_users, cfg.num_rx, rng, cfg.fading);
  Link link;
  link.sigma2 = sigma2;
  link.H_true = active_columns(lift_to_real(ch, powers), cfg.constellation);
  const double data_snr = bits_per_symbol(cfg.constellation) / sigma2;
  const auto csi = cfg.csi.resolve(data_snr);
  link.H_est = csi.perfect ? link.H_true : active_columns(impair_csi(ch, powers, csi, rng), cfg.constellation);
  link.sigma2_hat = perturb_noise_variance(sigma2, cfg.csi.noise_var_mismatch, rng);
  return link;
}

std::int64_t count_errors(const Vector& hard, const Vector& x) {
  std::int64_t e = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) e += hard[i] != x[i];
  return e;
}

struct TrialOutcome {
  std::vector<std::int64_t> errors;
  std::vector<MacCounter> macs;
  std::int64_t bits = 0;
  std::int64_t detections = 0;
};

TrialOutcome uncoded_trial(const ExperimentConfig& cfg, double sigma2, RandomEngine& rng) {
  const auto link = draw_link(cfg, sigma2, rng);
  const Vector x = random_symbols(cfg.real_dims(), rng);
  const Vector y = transmit(link.H_true, x, sigma2, rng);
  const DetectorInput in{link.H_est, y, link.sigma2_hat, cfg.beta(), cfg.constellation};
  TrialOutcome out;
  out.bits = x.size();
  out.detections = 1;
  for (const auto& spec : cfg.detectors) {
    auto det = run_detector(spec, in);
    out.errors.push_back(count_errors(det.hard, x));
    out.macs.push_back(det.out.macs);
  }
  return out;
}

TrialOutcome coded_trial(const ExperimentConfig& cfg, double sigma2, const std::vector<std::size_t>& perm,
                         RandomEngine& rng) {
  const auto& coding = *cfg.coding;
  const int K = cfg.num_users;
  const bool qpsk = cfg.constellation == Constellation::Qpsk;
  const auto link = draw_link(cfg, sigma2, rng);

  const std::size_t L = static_cast<std::size_t>(coding.block_length);
  const std::size_t coded_len = coding.code.coded_length(L);
  const std::size_t uses = qpsk ? coded_len / 2 : coded_len;

  std::vector<Bits> info(K), coded(K);
  for (int k = 0; k < K; ++k) {
    info[k].resize(L);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < L; ++i) {
      if (i % 64 == 0) word = rng();
      info[k][i] = static_cast<std::uint8_t>(word & 1U);
      word >>= 1;
    }
    coded[k] = conv_encode(info[k], coding.code);
    if (coding.interleave) coded[k] = interleave(coded[k], perm);
  }

  const std::size_t D = cfg.detectors.size();
  // llr[d][k] is user k's coded-bit LLR sequence in channel order.
  std::vector<std::vector<std::vector<double>>> llr(D, std::vector<std::vector<double>>(K, std::vector<double>(coded_len)));
  TrialOutcome out;
  out.errors.assign(D, 0);
  out.macs.assign(D, MacCounter{});
  out.bits = static_cast<std::int64_t>(L) * K;
  out.detections = static_cast<std::int64_t>(uses);

  Vector x(cfg.real_dims());
  for (std::size_t u = 0; u < uses; ++u) {
    for (int k = 0; k < K; ++k) {
      if (qpsk) {
        x[k] = bpsk_map(coded[k][2 * u]);
        x[k + K] = bpsk_map(coded[k][2 * u + 1]);
      } else {
        x[k] = bpsk_map(coded[k][u]);
      }
    }
    const Vector y = transmit(link.H_true, x, sigma2, rng);
    const DetectorInput in{link.H_est, y, link.sigma2_hat, cfg.beta(), cfg.constellation};
    for (std::size_t d = 0; d < D; ++d) {
      auto det = run_detector(cfg.detectors[d], in);
      out.macs[d] += det.out.macs;
      for (int k = 0; k < K; ++k) {
        if (qpsk) {
          llr[d][k][2 * u] = det.out.llr[k];
          llr[d][k][2 * u + 1] = det.out.llr[k + K];
        } else {
          llr[d][k][u] = det.out.llr[k];
        }
      }
    }
  }

  for (std::size_t d = 0; d < D; ++d) {
    for (int k = 0; k < K; ++k) {
      const auto seq = coding.interleave ? deinterleave(llr[d][k], perm) : llr[d][k];
      const auto decoded = viterbi_decode_soft(seq, coding.code);
      for (std::size_t i = 0; i < L; ++i) out.errors[d] += decoded[i] != info[k][i];
    }
  }
  return out;
}

BerPoint finish_point(double eb_n0_db, std::int64_t trials, std::int64_t bits, std::int64_t errors,
                      const MacCounter& macs, std::int64_t detections) {
  BerPoint p;
  p.eb_n0_db = eb_n0_db;
  p.trials = trials;
  p.bits = bits;
  p.errors = errors;
  p.ber = bits > 0 ? static_cast<double>(errors) / static_cast<double>(bits) : 0.0;
  const auto ci = wilson_interval(errors, bits);
  p.ci_low = ci.low;
  p.ci_high = ci.high;
  p.macs_total = macs.total();
  p.macs_per_detection = detections > 0 ? macs.total() / static_cast<std::uint64_t>(detections) : 0;
  return p;
}

bool should_stop(const StopRule& stop, std::int64_t trials, std::int64_t bits,
                 const std::vector<std::int64_t>& errors) {
  if (stop.max_trials > 0 && trials >= stop.max_trials) return true;
  if (bits >= stop.max_bits) return true;
  return std::all_of(errors.begin(), errors.end(), [&](auto e) { return e >= stop.min_errors; });
}

std::int64_t batch_end(const StopRule& stop, std::int64_t done) {
  auto end = done + stop.batch_trials;
  if (stop.max_trials > 0) end = std::min(end, stop.max_trials);
  return end;
}

}  // namespace

BerResult run_ber_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t D = cfg.detectors.size();
  BerResult result;
  for (const auto& d : cfg.detectors) result.curves.push_back({d.name(), {}});

  std::vector<std::size_t> perm;
  if (cfg.coding && cfg.coding->interleave) {
    perm = make_interleaver(cfg.coding->code.coded_length(cfg.coding->block_length), cfg.seed);
  }

  for (std::size_t g = 0; g < cfg.eb_n0_db.size(); ++g) {
    const double sigma2 = cfg.sigma2_for_eb_n0(cfg.eb_n0_db[g]);
    std::vector<std::int64_t> errors(D, 0);
    std::vector<MacCounter> macs(D);
    std::int64_t trials = 0, bits = 0, detections = 0;

    while (!should_stop(cfg.stop, trials, bits, errors)) {
      const auto end = batch_end(cfg.stop, trials);
      std::vector<TrialOutcome> batch(static_cast<std::size_t>(end - trials));
      const auto start = trials;
      parallel_for(start, end, cfg.workers, [&](std::int64_t i) {
        auto rng = substream(cfg.seed, {static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(i)});
        batch[static_cast<std::size_t>(i - start)] =
            cfg.coding ? coded_trial(cfg, sigma2, perm, rng) : uncoded_trial(cfg, sigma2, rng);
      });
      for (const auto& t : batch) {
        for (std::size_t d = 0; d < D; ++d) {
          errors[d] += t.errors[d];
          macs[d] += t.macs[d];
        }
        bits += t.bits;
        detections += t.detections;
      }
      trials = end;
    }
    for (std::size_t d = 0; d < D; ++d) {
      result.curves[d].points.push_back(
          finish_point(cfg.eb_n0_db[g], trials, bits, errors[d], macs[d], detections));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

const ConvergenceRow& ConvergenceResult::row(const std::string& detector, int iteration) const {
  for (const auto& r : rows) {
    if (r.detector == detector && r.iteration == iteration) return r;
  }
  throw std::out_of_range("no convergence row for " + detector + " at iteration " + std::to_string(iteration));
}

const PairedCount& ConvergenceResult::pair(const std::string& a, const std::string& b, int iteration) const {
  for (const auto& p : paired) {
    if (p.a == a && p.b == b && p.iteration == iteration) return p;
  }
  throw std::out_of_range("no paired count for " + a + "/" + b);
}

ConvergenceResult run_convergence_study(const ExperimentConfig& cfg, double eb_n0_db) {
  cfg.validate();
  const std::size_t D = cfg.detectors.size();
  std::vector<std::size_t> iterative;
  int T = 0;
  for (std::size_t d = 0; d < D; ++d) {
    if (is_iterative(cfg.detectors[d].kind)) {
      iterative.push_back(d);
      T = std::max(T, cfg.detectors[d].iterations);
    }
  }
  if (iterative.empty()) throw ConfigError("convergence study needs an iterative detector");
  const double sigma2 = cfg.sigma2_for_eb_n0(eb_n0_db);
  const std::size_t I = iterative.size();

  // errors[d][t]: one-shot detectors use t = 0 only.
  struct Outcome {
    std::vector<std::vector<std::int64_t>> errors;
    std::vector<std::vector<std::int64_t>> discord;  // [(a*I+b)][t], a wrong and b right
    std::int64_t bits = 0;
  };

  auto trial = [&](RandomEngine& rng) {
    const auto link = draw_link(cfg, sigma2, rng);
    const Vector x = random_symbols(cfg.real_dims(), rng);
    const Vector y = transmit(link.H_true, x, sigma2, rng);
    const DetectorInput in{link.H_est, y, link.sigma2_hat, cfg.beta(), cfg.constellation};
    Outcome o;
    o.bits = x.size();
    o.errors.resize(D);
    std::vector<std::vector<Vector>> per_iter(I);
    for (std::size_t d = 0; d < D; ++d) {
      auto det = run_detector(cfg.detectors[d], in, true);
      if (is_iterative(cfg.detectors[d].kind)) {
        auto& hist = det.hard_per_iteration;
        while (static_cast<int>(hist.size()) < T) hist.push_back(hist.back());
        for (const auto& h : hist) o.errors[d].push_back(count_errors(h, x));
        const auto idx = static_cast<std::size_t>(std::find(iterative.begin(), iterative.end(), d) - iterative.begin());
        per_iter[idx] = std::move(hist);
      } else {
        o.errors[d].push_back(count_errors(det.hard, x));
      }
    }
    o.discord.assign(I * I, std::vector<std::int64_t>(T, 0));
    for (std::size_t a = 0; a < I; ++a) {
      for (std::size_t b = 0; b < I; ++b) {
        if (a == b) continue;
        for (int t = 0; t < T; ++t) {
          std::int64_t c = 0;
          for (Eigen::Index i = 0; i < x.size(); ++i) {
            c += per_iter[a][t][i] != x[i] && per_iter[b][t][i] == x[i];
          }
          o.discord[a * I + b][t] = c;
        }
      }
    }
    return o;
  };

  Outcome total;
  total.errors.resize(D);
  for (std::size_t d = 0; d < D; ++d) {
    total.errors[d].assign(is_iterative(cfg.detectors[d].kind) ? T : 1, 0);
  }
  total.discord.assign(I * I, std::vector<std::int64_t>(T, 0));
  std::int64_t trials = 0;
  std::vector<std::int64_t> final_errors(D, 0);

  while (!should_stop(cfg.stop, trials, total.bits, final_errors)) {
    const auto end = batch_end(cfg.stop, trials);
    std::vector<Outcome> batch(static_cast<std::size_t>(end - trials));
    const auto start = trials;
    parallel_for(start, end, cfg.workers, [&](std::int64_t i) {
      // Grid index slot 0xC0 keeps these streams apart from BER sweeps.
      auto rng = substream(cfg.seed, {0xC0ULL, static_cast<std::uint64_t>(i)});
      batch[static_cast<std::size_t>(i - start)] = trial(rng);
    });
    for (const auto& o : batch) {
      total.bits += o.bits;
      for (std::size_t d = 0; d < D; ++d) {
        for (std::size_t t = 0; t < o.errors[d].size(); ++t) total.errors[d][t] += o.errors[d][t];
      }
      for (std::size_t p = 0; p < I * I; ++p) {
        for (int t = 0; t < T; ++t) total.discord[p][t] += o.discord[p][t];
      }
    }
    for (std::size_t d = 0; d < D; ++d) final_errors[d] = total.errors[d].back();
    trials = end;
  }

  ConvergenceResult result;
  result.eb_n0_db = eb_n0_db;
  result.trials = trials;
  for (std::size_t d = 0; d < D; ++d) {
    const bool iter = is_iterative(cfg.detectors[d].kind);
    for (std::size_t t = 0; t < total.errors[d].size(); ++t) {
      ConvergenceRow r;
      r.detector = cfg.detectors[d].name();
      r.iteration = iter ? static_cast<int>(t) + 1 : 0;
      r.bits = total.bits;
      r.errors = total.errors[d][t];
      r.ber = total.bits > 0 ? static_cast<double>(r.errors) / static_cast<double>(total.bits) : 0.0;
      const auto ci = wilson_interval(r.errors, total.bits);
      r.ci_low = ci.low;
      r.ci_high = ci.high;
      result.rows.push_back(r);
    }
  }
  for (std::size_t a = 0; a < I; ++a) {
    for (std::size_t b = 0; b < I; ++b) {
      if (a == b) continue;
      for (int t = 0; t < T; ++t) {
        result.paired.push_back({cfg.detectors[iterative[a]].name(), cfg.detectors[iterative[b]].name(), t + 1,
                                 total.discord[a * I + b][t], total.discord[b * I + a][t]});
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------

std::vector<SinrCurve> run_sinr_study(const ExperimentConfig& cfg, const std::vector<double>& snr_grid_db) {
  cfg.validate();
  if (snr_grid_db.empty()) throw ConfigError("SNR grid must be nonempty");
  const std::size_t D = cfg.detectors.size();
  const std::int64_t trials = cfg.stop.max_trials > 0 ? cfg.stop.max_trials : 256;
  std::vector<SinrCurve> curves;
  for (const auto& d : cfg.detectors) curves.push_back({d.name(), {}});

  for (std::size_t g = 0; g < snr_grid_db.size(); ++g) {
    // Input SNR is Es/N0 with Es = bits per symbol (unit energy per real dimension).
    const double sigma2 = bits_per_symbol(cfg.constellation) / db_to_linear(snr_grid_db[g]);
    std::vector<std::vector<Vector>> stats(static_cast<std::size_t>(trials));
    std::vector<Vector> symbols(static_cast<std::size_t>(trials));
    parallel_for(0, trials, cfg.workers, [&](std::int64_t i) {
      auto rng = substream(cfg.seed, {0x5157ULL, static_cast<std::uint64_t>(g), static_cast<std::uint64_t>(i)});
      const auto link = draw_link(cfg, sigma2, rng);
      const Vector x = random_symbols(cfg.real_dims(), rng);
      const Vector y = transmit(link.H_true, x, sigma2, rng);
      const DetectorInput in{link.H_est, y, link.sigma2_hat, cfg.beta(), cfg.constellation};
      auto& row = stats[static_cast<std::size_t>(i)];
      for (const auto& spec : cfg.detectors) row.push_back(run_detector(spec, in).out.soft);
      symbols[static_cast<std::size_t>(i)] = x;
    });
    for (std::size_t d = 0; d < D; ++d) {
      SinrAccumulator acc(cfg.num_users, cfg.constellation);
      for (std::int64_t i = 0; i < trials; ++i) {
        acc.add(stats[static_cast<std::size_t>(i)][d], symbols[static_cast<std::size_t>(i)]);
      }
      const auto per_user = acc.sinr(cfg.sinr_min_trials);
      double mean = 0.0, mean_db = 0.0, sq_db = 0.0;
      for (double s : per_user) {
        mean += s;
        mean_db += linear_to_db(s);
        sq_db += linear_to_db(s) * linear_to_db(s);
      }
      const double n = static_cast<double>(per_user.size());
      mean /= n;
      mean_db /= n;
      const double var_db = n > 1 ? std::max(0.0, (sq_db - n * mean_db * mean_db) / (n - 1)) : 0.0;
      SinrPoint p;
      p.snr_db = snr_grid_db[g];
      p.sinr_linear = mean;
      p.sinr_db = linear_to_db(mean);
      p.ci_half_db = kZ95 * std::sqrt(var_db / n);
      p.trials = trials;
      curves[d].points.push_back(p);
    }
  }
  return curves;
}

}  // namespace mblast
