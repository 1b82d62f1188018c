#include "mblast/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <sstream>
#include <vector>

#include "mblast/config.hpp"
#include "mblast/report.hpp"

namespace mblast {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_tokens(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    auto b = tok.find_first_not_of(" \t");
    auto e = tok.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(tok.substr(b, e - b + 1));
  }
  return out;
}

std::optional<std::uint64_t> seed_from_env() {
  const char* v = std::getenv("MBLAST_SEED");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  auto s = std::strtoull(v, &end, 10);
  if (*end) throw ConfigError(std::string("MBLAST_SEED is not an unsigned integer: ") + v);
  return s;
}

RunConfig resolve_config(const CliOptions& o) {
  RunConfig rc;
  if (!o.config_path.empty()) {
    rc = load_config(o.config_path, false);
  } else if (o.command != "complexity") {
    throw ConfigError("--config is required for '" + o.command + "'");
  }
  auto& e = rc.experiment;
  if (o.seed) {
    e.seed = *o.seed;
  } else if (auto s = seed_from_env(); s && !rc.seed_from_file) {
    e.seed = *s;
  }
  if (o.workers) e.workers = *o.workers;
  if (o.detectors) {
    e.detectors.clear();
    for (const auto& t : split_tokens(*o.detectors)) e.detectors.push_back(parse_detector(t));
  }
  if (o.grid_db) {
    auto grid = parse_number_list(*o.grid_db);
    if (o.command == "sinr" || o.command == "throughput") {
      rc.sinr_snr_db = grid;
    } else {
      e.eb_n0_db = grid;
    }
  }
  if (o.eb_n0_db) rc.convergence_eb_n0_db = *o.eb_n0_db;
  if (o.command != "complexity") e.validate();
  return rc;
}

// Accepts a detector label or, when unambiguous, a bare kind such as "mblast".
std::string resolve_target(const ExperimentConfig& e, const std::string& target) {
  std::vector<std::string> by_kind;
  for (const auto& d : e.detectors) {
    if (d.name() == target) return target;
    if (to_string(d.kind) == target) by_kind.push_back(d.name());
  }
  if (by_kind.size() == 1) return by_kind.front();
  if (by_kind.empty()) throw ConfigError("throughput target '" + target + "' is not among the detectors");
  throw ConfigError("throughput target '" + target + "' matches several detectors; use a label");
}

struct OutputSet {
  fs::path dir;
  json written = json::array();

  void put(const std::string& name, const std::string& contents) {
    write_file_atomic(dir / name, contents);
    written.push_back(name);
  }
};

ExperimentConfig sinr_experiment(const RunConfig& rc) {
  auto e = rc.experiment;
  e.stop.max_trials = rc.sinr_trials;
  return e;
}

std::vector<SinrCurve> run_sinr(const RunConfig& rc, OutputSet& outs) {
  auto curves = run_sinr_study(sinr_experiment(rc), rc.sinr_snr_db);
  outs.put("sinr.csv", sinr_csv(curves));
  outs.put("sinr.json", sinr_json(curves).dump(2) + "\n");
  return curves;
}

void execute(const CliOptions& o, const RunConfig& rc, OutputSet& outs, std::ostream& out) {
  const auto& e = rc.experiment;
  if (o.command == "ber") {
    auto r = run_ber_sweep(e);
    outs.put("ber.csv", ber_csv(r));
    json j = ber_json(r);
    j["config"] = to_json(rc);
    outs.put("ber.json", j.dump(2) + "\n");
    out << ber_csv(r);
  } else if (o.command == "convergence") {
    auto r = run_convergence_study(e, rc.convergence_eb_n0_db);
    outs.put("conv.csv", convergence_csv(r));
    outs.put("conv.json", convergence_json(r).dump(2) + "\n");
    out << convergence_csv(r);
  } else if (o.command == "sinr") {
    auto curves = run_sinr(rc, outs);
    out << sinr_csv(curves);
  } else if (o.command == "throughput") {
    if (rc.cdf_paths.empty()) throw ConfigError("throughput needs at least one CDF file (throughput.cdfs)");
    std::vector<SinrCdf> cdfs;
    for (const auto& p : rc.cdf_paths) cdfs.push_back(load_cdf(p));
    auto curves = run_sinr(rc, outs);
    auto rows = throughput_table(to_transfer_curves(curves), resolve_target(e, rc.throughput_target), cdfs,
                                 rc.percentiles, rc.floor_gains_at_zero);
    outs.put("tput.csv", throughput_csv(rows));
    outs.put("tput.json", throughput_json(rows).dump(2) + "\n");
    out << throughput_csv(rows);
  } else if (o.command == "complexity") {
    std::vector<ComplexityRow> rows;
    for (const auto& c : reference_table_configs()) rows.push_back(complexity_row(c, rc.measure_up_to_users));
    outs.put("macs.csv", complexity_csv(rows));
    outs.put("macs.json", complexity_json(rows).dump(2) + "\n");
    out << complexity_csv(rows);
  } else {
    throw ConfigError("unknown command '" + o.command + "'");
  }
}

}  // namespace

int run_command(const CliOptions& o, std::ostream& out, std::ostream& err) {
  try {
    auto rc = resolve_config(o);
    if (o.command == "validate") {
      out << to_json(rc).dump(2) << "\n";
      return kExitOk;
    }
    std::error_code ec;
    fs::create_directories(o.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + o.out_dir.string() + ": " + ec.message());

    auto start = std::chrono::steady_clock::now();
    OutputSet outs{o.out_dir};
    execute(o, rc, outs, out);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    json manifest{{"command", o.command},
                  {"version", kVersion},
                  {"seed", rc.experiment.seed},
                  {"workers", rc.experiment.workers},
                  {"config", to_json(rc)},
                  {"outputs", outs.written},
                  {"wall_seconds", wall}};
    write_file_atomic(o.out_dir / "manifest.json", manifest.dump(2) + "\n");
    return kExitOk;
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedLoadError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const IoError& ex) {
    err << "i/o error: " << ex.what() << "\n";
    return kExitIo;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace mblast
