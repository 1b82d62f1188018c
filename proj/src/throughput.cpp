#include "mblast/throughput.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mblast/types.hpp"

namespace mblast {

void SinrCdf::validate() const {
  if (sinr_db.empty() || sinr_db.size() != cdf.size()) throw ConfigError("CDF " + label + ": empty or ragged");
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    if (!(cdf[i] >= 0.0 && cdf[i] <= 1.0)) throw ConfigError("CDF " + label + ": probability outside [0, 1]");
    if (i > 0 && !(sinr_db[i] > sinr_db[i - 1])) {
      throw ConfigError("CDF " + label + ": sinr_db must be strictly increasing");
    }
    if (i > 0 && cdf[i] < cdf[i - 1]) throw ConfigError("CDF " + label + ": cdf must be nondecreasing");
  }
}

SinrCdf load_cdf(const std::filesystem::path& path, std::string label) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CDF file " + path.string());
  SinrCdf out;
  out.label = label.empty() ? path.stem().string() : std::move(label);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "sinr_db,cdf") throw ConfigError(path.string() + ": header must be 'sinr_db,cdf'");
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    double s = 0.0, p = 0.0;
    char comma = 0;
    std::string rest;
    if (!(ss >> s >> comma >> p) || comma != ',' || (ss >> rest)) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'sinr_db,cdf'");
    }
    out.sinr_db.push_back(s);
    out.cdf.push_back(p);
  }
  out.validate();
  return out;
}

double shannon_rate(double sinr_linear) {
  if (sinr_linear < 0.0) throw std::invalid_argument("shannon_rate: negative SINR");
  return std::log2(1.0 + sinr_linear);
}

double percentile_sinr(const SinrCdf& cdf, double percentile) {
  cdf.validate();
  const double p = percentile / 100.0;
  if (cdf.cdf.size() == 1) return cdf.sinr_db.front();
  if (p < cdf.cdf.front() || p > cdf.cdf.back()) {
    throw std::out_of_range("percentile " + std::to_string(percentile) + " outside the CDF support of " +
                            cdf.label);
  }
  for (std::size_t i = 0; i + 1 < cdf.cdf.size(); ++i) {
    const double lo = cdf.cdf[i];
    const double hi = cdf.cdf[i + 1];
    if (p >= lo && p <= hi) {
      if (hi == lo) return cdf.sinr_db[i];
      const double f = (p - lo) / (hi - lo);
      return cdf.sinr_db[i] + f * (cdf.sinr_db[i + 1] - cdf.sinr_db[i]);
    }
  }
  return cdf.sinr_db.back();
}

double TransferCurve::at(double snr_db_in) const {
  if (snr_db.empty() || snr_db.size() != sinr_linear.size()) {
    throw std::invalid_argument("transfer curve for " + detector + " is empty or ragged");
  }
  if (snr_db.size() == 1) {
    if (snr_db_in != snr_db.front()) throw std::out_of_range("single-point transfer curve for " + detector);
    return sinr_linear.front();
  }
  if (snr_db_in < snr_db.front() || snr_db_in > snr_db.back()) {
    throw std::out_of_range("operating SNR " + std::to_string(snr_db_in) + " dB outside the measured range of " +
                            detector);
  }
  const auto it = std::upper_bound(snr_db.begin(), snr_db.end(), snr_db_in);
  std::size_t i = static_cast<std::size_t>(it - snr_db.begin());
  if (i == snr_db.size()) i = snr_db.size() - 1;
  const std::size_t j = i - 1;
  const double f = (snr_db_in - snr_db[j]) / (snr_db[i] - snr_db[j]);
  const double a = linear_to_db(sinr_linear[j]);
  const double b = linear_to_db(sinr_linear[i]);
  return db_to_linear(a + f * (b - a));
}

double relative_gain(const TransferCurve& a, const TransferCurve& b, const SinrCdf& cdf, double percentile,
                     bool floor_at_zero) {
  const double op = percentile_sinr(cdf, percentile);
  const double ra = shannon_rate(a.at(op));
  const double rb = shannon_rate(b.at(op));
  if (!(rb > 0.0)) throw std::domain_error("baseline rate is zero");
  const double gain = 100.0 * (ra / rb - 1.0);
  return floor_at_zero ? std::max(0.0, gain) : gain;
}

std::vector<GainRow> throughput_table(const std::vector<TransferCurve>& curves, const std::string& target,
                                      const std::vector<SinrCdf>& cdfs, const std::vector<double>& percentiles,
                                      bool floor_at_zero) {
  const auto tgt = std::find_if(curves.begin(), curves.end(), [&](const auto& c) { return c.detector == target; });
  if (tgt == curves.end()) throw ConfigError("no transfer curve for target detector '" + target + "'");
  std::vector<GainRow> rows;
  for (const auto& cdf : cdfs) {
    for (double p : percentiles) {
      const double op = percentile_sinr(cdf, p);
      for (const auto& base : curves) {
        if (base.detector == target) continue;
        GainRow r;
        r.cdf_source = cdf.label;
        r.percentile = p;
        r.target = target;
        r.baseline = base.detector;
        r.operating_snr_db = op;
        r.rate_target = shannon_rate(tgt->at(op));
        r.rate_baseline = shannon_rate(base.at(op));
        r.gain_pct = relative_gain(*tgt, base, cdf, p, floor_at_zero);
        rows.push_back(r);
      }
    }
  }
  return rows;
}

}  // namespace mblast
