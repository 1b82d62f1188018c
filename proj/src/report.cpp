#include "mblast/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mblast/types.hpp"

namespace mblast {

using nlohmann::json;

std::string fmt_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string ber_csv(const BerResult& r) {
  std::ostringstream out;
  out << "detector,eb_n0_db,bits,errors,ber,ci_low,ci_high,macs\n";
  for (const auto& c : r.curves) {
    for (const auto& p : c.points) {
      out << c.detector << ',' << fmt_num(p.eb_n0_db) << ',' << p.bits << ',' << p.errors << ',' << fmt_num(p.ber)
          << ',' << fmt_num(p.ci_low) << ',' << fmt_num(p.ci_high) << ',' << p.macs_per_detection << '\n';
    }
  }
  return out.str();
}

json ber_json(const BerResult& r) {
  json curves = json::array();
  for (const auto& c : r.curves) {
    json pts = json::array();
    for (const auto& p : c.points) {
      pts.push_back({{"eb_n0_db", p.eb_n0_db},
                     {"trials", p.trials},
                     {"bits", p.bits},
                     {"errors", p.errors},
                     {"ber", p.ber},
                     {"ci_low", p.ci_low},
                     {"ci_high", p.ci_high},
                     {"macs", p.macs_per_detection},
                     {"macs_total", p.macs_total}});
    }
    curves.push_back({{"detector", c.detector}, {"points", pts}});
  }
  return {{"curves", curves}};
}

std::string convergence_csv(const ConvergenceResult& r) {
  std::ostringstream out;
  out << "detector,iteration,ber,ci_low,ci_high,bits,errors\n";
  for (const auto& row : r.rows) {
    out << row.detector << ',' << row.iteration << ',' << fmt_num(row.ber) << ',' << fmt_num(row.ci_low) << ','
        << fmt_num(row.ci_high) << ',' << row.bits << ',' << row.errors << '\n';
  }
  return out.str();
}

json convergence_json(const ConvergenceResult& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"detector", row.detector},
                    {"iteration", row.iteration},
                    {"ber", row.ber},
                    {"ci_low", row.ci_low},
                    {"ci_high", row.ci_high},
                    {"bits", row.bits},
                    {"errors", row.errors}});
  }
  json paired = json::array();
  for (const auto& p : r.paired) {
    paired.push_back({{"a", p.a}, {"b", p.b}, {"iteration", p.iteration}, {"a_only", p.a_only}, {"b_only", p.b_only}});
  }
  return {{"eb_n0_db", r.eb_n0_db}, {"trials", r.trials}, {"rows", rows}, {"paired", paired}};
}

std::string complexity_csv(const std::vector<ComplexityRow>& rows) {
  std::ostringstream out;
  out << "users,rx_antennas,iterations,beta,formula_mblast,formula_mmse,formula_vblast,formula_ratio_pct,"
         "formula_vblast_ratio,measured_mblast,measured_mmse,measured_vblast,measured_ratio_pct,"
         "measured_vblast_ratio\n";
  for (const auto& r : rows) {
    out << r.num_users << ',' << r.num_rx << ',' << r.iterations << ','
        << fmt_num(static_cast<double>(r.num_users) / r.num_rx) << ',' << r.formula_mblast << ',' << r.formula_mmse
        << ',' << r.formula_vblast << ',' << fmt_num(r.formula_ratio_pct) << ',' << fmt_num(r.formula_vblast_ratio)
        << ',' << r.measured_mblast << ',' << r.measured_mmse << ',' << r.measured_vblast << ','
        << fmt_num(r.measured_ratio_pct) << ',' << fmt_num(r.measured_vblast_ratio) << '\n';
  }
  return out.str();
}

json complexity_json(const std::vector<ComplexityRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"users", r.num_users},
                   {"rx_antennas", r.num_rx},
                   {"iterations", r.iterations},
                   {"formula_mblast", r.formula_mblast},
                   {"formula_mmse", r.formula_mmse},
                   {"formula_vblast", r.formula_vblast},
                   {"formula_ratio_pct", r.formula_ratio_pct},
                   {"formula_vblast_ratio", r.formula_vblast_ratio},
                   {"measured_mblast", r.measured_mblast},
                   {"measured_mmse", r.measured_mmse},
                   {"measured_vblast", r.measured_vblast},
                   {"measured_ratio_pct", r.measured_ratio_pct},
                   {"measured_vblast_ratio", r.measured_vblast_ratio}});
  }
  return {{"rows", arr}};
}

std::string sinr_csv(const std::vector<SinrCurve>& curves) {
  std::ostringstream out;
  out << "detector,snr_db,sinr_db,sinr_linear,ci_half_db,trials\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      out << c.detector << ',' << fmt_num(p.snr_db) << ',' << fmt_num(p.sinr_db) << ',' << fmt_num(p.sinr_linear)
          << ',' << fmt_num(p.ci_half_db) << ',' << p.trials << '\n';
    }
  }
  return out.str();
}

json sinr_json(const std::vector<SinrCurve>& curves) {
  json arr = json::array();
  for (const auto& c : curves) {
    json pts = json::array();
    for (const auto& p : c.points) {
      pts.push_back({{"snr_db", p.snr_db},
                     {"sinr_db", p.sinr_db},
                     {"sinr_linear", p.sinr_linear},
                     {"ci_half_db", p.ci_half_db},
                     {"trials", p.trials}});
    }
    arr.push_back({{"detector", c.detector}, {"points", pts}});
  }
  return {{"curves", arr}};
}

std::string throughput_csv(const std::vector<GainRow>& rows) {
  std::ostringstream out;
  out << "cdf_source,percentile,baseline,gain_pct,target,operating_snr_db,rate_target,rate_baseline\n";
  for (const auto& r : rows) {
    out << r.cdf_source << ',' << fmt_num(r.percentile) << ',' << r.baseline << ',' << fmt_num(r.gain_pct) << ','
        << r.target << ',' << fmt_num(r.operating_snr_db) << ',' << fmt_num(r.rate_target) << ','
        << fmt_num(r.rate_baseline) << '\n';
  }
  return out.str();
}

json throughput_json(const std::vector<GainRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"cdf_source", r.cdf_source},
                   {"percentile", r.percentile},
                   {"baseline", r.baseline},
                   {"gain_pct", r.gain_pct},
                   {"target", r.target},
                   {"operating_snr_db", r.operating_snr_db},
                   {"rate_target", r.rate_target},
                   {"rate_baseline", r.rate_baseline}});
  }
  return {{"rows", arr}};
}

std::vector<TransferCurve> to_transfer_curves(const std::vector<SinrCurve>& curves) {
  std::vector<TransferCurve> out;
  for (const auto& c : curves) {
    TransferCurve t;
    t.detector = c.detector;
    for (const auto& p : c.points) {
      t.snr_db.push_back(p.snr_db);
      t.sinr_linear.push_back(p.sinr_linear);
    }
    out.push_back(std::move(t));
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

}  // namespace mblast
