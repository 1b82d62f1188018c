#include "mblast/channel.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace mblast {

std::string to_string(Constellation c) { return c == Constellation::Bpsk ? "bpsk" : "qpsk"; }

Constellation constellation_from_string(const std::string& s) {
  if (s == "bpsk" || s == "BPSK") return Constellation::Bpsk;
  if (s == "qpsk" || s == "QPSK") return Constellation::Qpsk;
  throw ConfigError("unknown constellation '" + s + "'");
}

std::string to_string(FadingModel f) { return f == FadingModel::Rayleigh ? "rayleigh" : "awgn"; }

FadingModel fading_from_string(const std::string& s) {
  if (s == "rayleigh") return FadingModel::Rayleigh;
  if (s == "awgn") return FadingModel::Awgn;
  throw ConfigError("unknown fading model '" + s + "'");
}

ComplexChannel generate_channel(int num_users, int num_rx, RandomEngine& rng, FadingModel fading) {
  if (num_users <= 0 || num_rx <= 0) throw DimensionError("channel dimensions must be positive");
  // K = M = 1 is the single-antenna reference link; any other K >= M is overloaded.
  if (num_users >= num_rx && !(num_users == 1 && num_rx == 1)) {
    throw UnsupportedLoadError("unsupported load: K=" + std::to_string(num_users) +
                               " must be smaller than M=" + std::to_string(num_rx));
  }
  ComplexChannel ch{CMatrix(num_rx, num_users)};
  if (fading == FadingModel::Awgn) {
    ch.entries.setConstant(std::complex<double>(1.0 / std::sqrt(double(num_rx)), 0.0));
    return ch;
  }
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5 / num_rx));
  for (int k = 0; k < num_users; ++k) {
    for (int m = 0; m < num_rx; ++m) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      ch.entries(m, k) = {re, im};
    }
  }
  return ch;
}

Matrix lift_to_real(const ComplexChannel& ch, const PowerProfile& powers) {
  const int M = ch.num_rx();
  const int K = ch.num_users();
  if (powers.num_users() != K) {
    throw DimensionError("power profile has " + std::to_string(powers.num_users()) +
                         " users, channel has " + std::to_string(K));
  }
  Matrix H(2 * M, 2 * K);
  const Matrix re = ch.entries.real() * powers.sqrt_powers.asDiagonal();
  const Matrix im = ch.entries.imag() * powers.sqrt_powers.asDiagonal();
  H.topLeftCorner(M, K) = re;
  H.topRightCorner(M, K) = -im;
  H.bottomLeftCorner(M, K) = im;
  H.bottomRightCorner(M, K) = re;
  return H;
}

Matrix active_columns(const Matrix& full_lift, Constellation c) {
  if (full_lift.cols() % 2 != 0) throw DimensionError("full lift must have an even column count");
  if (c == Constellation::Qpsk) return full_lift;
  return full_lift.leftCols(full_lift.cols() / 2);
}

Matrix complete_lift(const Matrix& bpsk_active) {
  const auto rows = bpsk_active.rows();
  const auto K = bpsk_active.cols();
  if (rows % 2 != 0) throw DimensionError("real model must have an even row count");
  const auto M = rows / 2;
  Matrix H(rows, 2 * K);
  H.leftCols(K) = bpsk_active;
  H.topRightCorner(M, K) = -bpsk_active.bottomRows(M);
  H.bottomRightCorner(M, K) = bpsk_active.topRows(M);
  return H;
}

Vector transmit(const Matrix& H, const Vector& x, double sigma2, RandomEngine& rng) {
  if (H.cols() != x.size()) throw DimensionError("symbol vector does not match channel columns");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != 1.0 && x[i] != -1.0) {
      throw std::invalid_argument("transmit: symbols must be +-1");
    }
  }
  if (sigma2 < 0.0) throw std::invalid_argument("transmit: negative noise variance");
  Vector y = H * x;
  if (sigma2 > 0.0) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(sigma2 / 2.0));
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += gauss(rng);
  }
  return y;
}

Matrix impair_csi(const ComplexChannel& ch, const PowerProfile& powers, const CsiConfig& cfg,
                  RandomEngine& rng) {
  if (cfg.perfect) return lift_to_real(ch, powers);
  if (!(cfg.pilot_snr > 0.0)) throw std::invalid_argument("impair_csi: pilot SNR must be positive");
  const int M = ch.num_rx();
  const int K = ch.num_users();
  CMatrix estimate = ch.entries * powers.sqrt_powers.asDiagonal();
  std::normal_distribution<double> gauss(0.0, std::sqrt(1.0 / (2.0 * M * cfg.pilot_snr)));
  for (int k = 0; k < K; ++k) {
    for (int m = 0; m < M; ++m) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      estimate(m, k) += std::complex<double>(re, im);
    }
  }
  return lift_to_real(ComplexChannel{std::move(estimate)}, PowerProfile::equal(K));
}

double perturb_noise_variance(double sigma2, double mismatch, RandomEngine& rng) {
  if (mismatch < 0.0 || mismatch >= 1.0) {
    throw std::invalid_argument("noise variance mismatch must lie in [0, 1)");
  }
  if (mismatch == 0.0) return sigma2;
  std::uniform_real_distribution<double> u((1.0 - mismatch) * sigma2, (1.0 + mismatch) * sigma2);
  return u(rng);
}

std::vector<double> read_power_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open power file " + path.string());
  std::vector<double> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    double value = 0.0;
    if (!(ss >> value)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": not a number");
    }
    std::string rest;
    if (ss >> rest || value < 0.0 || !std::isfinite(value)) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                        ": expected one nonnegative power");
    }
    out.push_back(value);
  }
  return out;
}

PowerProfile generate_powers(int num_users, const PowerSpec& spec, RandomEngine& rng) {
  if (std::holds_alternative<EqualPowers>(spec)) return PowerProfile::equal(num_users);

  if (const auto* file = std::get_if<PowersFromFile>(&spec)) {
    const auto powers = read_power_file(file->path);
    if (static_cast<int>(powers.size()) != num_users) {
      throw ConfigError(file->path.string() + ": expected " + std::to_string(num_users) +
                        " powers, found " + std::to_string(powers.size()));
    }
    PowerProfile p{Vector(num_users)};
    for (int k = 0; k < num_users; ++k) p.sqrt_powers[k] = std::sqrt(powers[k]);
    return p;
  }

  const double std_db = std::get<LognormalPowers>(spec).std_db;
  if (std_db < 0.0) throw ConfigError("lognormal std_db must be nonnegative");
  if (std_db == 0.0) return PowerProfile::equal(num_users);
  std::normal_distribution<double> gauss(0.0, std_db);
  Vector p(num_users);
  for (int k = 0; k < num_users; ++k) p[k] = db_to_linear(gauss(rng));
  p /= p.mean();
  return {p.cwiseSqrt()};
}

Vector random_symbols(int dims, RandomEngine& rng) {
  Vector x(dims);
  std::uint64_t word = 0;
  for (int i = 0; i < dims; ++i) {
    if (i % 64 == 0) word = rng();
    x[i] = (word & 1U) ? 1.0 : -1.0;
    word >>= 1;
  }
  return x;
}

}  // namespace mblast
