#include "mblast/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace mblast {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

std::string domain_name(LinearDomain d) { return d == LinearDomain::Complex ? "complex" : "real"; }

DetectorSpec detector_from_json(const json& j) {
  if (j.is_string()) return parse_detector(j.get<std::string>());
  if (!j.is_object()) throw ConfigError("detector entries must be strings or objects");
  reject_unknown(j, {"kind", "iterations", "domain", "self_term", "soft_cancel", "label"}, "detector");
  if (!j.contains("kind")) throw ConfigError("detector entry is missing 'kind'");
  DetectorSpec d;
  d.kind = detector_kind_from_string(get_or<std::string>(j, "kind", ""));
  d.iterations = get_or(j, "iterations", d.iterations);
  const auto domain = get_or<std::string>(j, "domain", "complex");
  if (domain == "complex") {
    d.domain = LinearDomain::Complex;
  } else if (domain == "real") {
    d.domain = LinearDomain::Real;
  } else {
    throw ConfigError("detector domain must be 'complex' or 'real'");
  }
  const auto self = get_or<std::string>(j, "self_term", "cancel");
  if (self == "cancel") {
    d.self_term = SelfTerm::Cancel;
  } else if (self == "literal") {
    d.self_term = SelfTerm::Literal;
  } else {
    throw ConfigError("self_term must be 'cancel' or 'literal'");
  }
  d.soft_cancel = get_or(j, "soft_cancel", false);
  d.label = get_or<std::string>(j, "label", "");
  return d;
}

json detector_to_json(const DetectorSpec& d) {
  json j{{"kind", to_string(d.kind)}, {"label", d.name()}};
  if (is_iterative(d.kind)) {
    j["iterations"] = d.iterations;
    j["self_term"] = d.self_term == SelfTerm::Cancel ? "cancel" : "literal";
  } else if (d.kind != DetectorKind::MatchedFilter) {
    j["domain"] = domain_name(d.domain);
  }
  if (d.kind == DetectorKind::ZfSic || d.kind == DetectorKind::MmseSic) j["soft_cancel"] = d.soft_cancel;
  return j;
}

std::vector<double> number_array(const json& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError(std::string(what) + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

DetectorSpec parse_detector(const std::string& token) {
  DetectorSpec d;
  const auto colon = token.find(':');
  d.kind = detector_kind_from_string(token.substr(0, colon));
  if (colon != std::string::npos) {
    const auto digits = token.substr(colon + 1);
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), d.iterations);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || d.iterations < 1) {
      throw ConfigError("bad iteration count in detector '" + token + "'");
    }
    if (!is_iterative(d.kind)) throw ConfigError("detector '" + token + "' takes no iteration count");
    d.label = token;
  }
  return d;
}

std::vector<double> parse_number_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("'" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ConfigError("empty number list");
  return out;
}

RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir, bool validate) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(doc,
                 {"users", "rx_antennas", "constellation", "fading", "detectors", "eb_n0_db", "csi", "power",
                  "coding", "stop", "seed", "workers", "convergence", "sinr", "throughput", "complexity",
                  "description"},
                 "config");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };

  RunConfig rc;
  auto& e = rc.experiment;
  e.num_users = get_or(doc, "users", e.num_users);
  e.num_rx = get_or(doc, "rx_antennas", e.num_rx);
  e.constellation = constellation_from_string(get_or<std::string>(doc, "constellation", "bpsk"));
  e.fading = fading_from_string(get_or<std::string>(doc, "fading", "rayleigh"));
  if (doc.contains("detectors")) {
    if (!doc["detectors"].is_array()) throw ConfigError("detectors must be an array");
    for (const auto& d : doc["detectors"]) e.detectors.push_back(detector_from_json(d));
  }
  if (doc.contains("eb_n0_db")) e.eb_n0_db = number_array(doc["eb_n0_db"], "eb_n0_db");

  if (doc.contains("csi")) {
    const auto& c = doc["csi"];
    reject_unknown(c, {"perfect", "pilot_offset_db", "pilot_snr_db", "noise_var_mismatch"}, "csi");
    e.csi.perfect = get_or(c, "perfect", e.csi.perfect);
    e.csi.pilot_offset_db = get_or(c, "pilot_offset_db", e.csi.pilot_offset_db);
    if (c.contains("pilot_snr_db")) e.csi.pilot_snr_db = get_or(c, "pilot_snr_db", 0.0);
    e.csi.noise_var_mismatch = get_or(c, "noise_var_mismatch", e.csi.noise_var_mismatch);
  }

  if (doc.contains("power")) {
    const auto& p = doc["power"];
    reject_unknown(p, {"profile", "std_db", "path"}, "power");
    const auto profile = get_or<std::string>(p, "profile", "equal");
    if (profile == "equal") {
      e.power = EqualPowers{};
    } else if (profile == "lognormal") {
      e.power = LognormalPowers{get_or(p, "std_db", 8.0)};
    } else if (profile == "file") {
      if (!p.contains("path")) throw ConfigError("power profile 'file' needs a path");
      e.power = PowersFromFile{resolve(get_or<std::string>(p, "path", ""))};
    } else {
      throw ConfigError("unknown power profile '" + profile + "'");
    }
  }

  if (doc.contains("coding") && !doc["coding"].is_null()) {
    const auto& c = doc["coding"];
    reject_unknown(c, {"constraint_length", "generators", "block_length", "interleave"}, "coding");
    CodingSpec cs;
    cs.code.constraint_length = get_or(c, "constraint_length", cs.code.constraint_length);
    if (c.contains("generators")) {
      const auto& g = c["generators"];
      if (!g.is_array() || g.size() != 2) throw ConfigError("coding.generators must list two octal strings");
      for (std::size_t i = 0; i < 2; ++i) {
        cs.code.generators[i] = parse_octal(g[i].is_string() ? g[i].get<std::string>() : g[i].dump());
      }
    }
    cs.block_length = get_or(c, "block_length", cs.block_length);
    cs.interleave = get_or(c, "interleave", cs.interleave);
    e.coding = cs;
  }

  if (doc.contains("stop")) {
    const auto& s = doc["stop"];
    reject_unknown(s, {"min_errors", "max_bits", "max_trials", "batch_trials"}, "stop");
    e.stop.min_errors = get_or(s, "min_errors", e.stop.min_errors);
    e.stop.max_bits = get_or(s, "max_bits", e.stop.max_bits);
    e.stop.max_trials = get_or(s, "max_trials", e.stop.max_trials);
    e.stop.batch_trials = get_or(s, "batch_trials", e.stop.batch_trials);
  }
  e.seed = get_or<std::uint64_t>(doc, "seed", e.seed);
  rc.seed_from_file = doc.contains("seed");
  e.workers = get_or(doc, "workers", 0);

  if (doc.contains("convergence")) {
    reject_unknown(doc["convergence"], {"eb_n0_db"}, "convergence");
    rc.convergence_eb_n0_db = get_or(doc["convergence"], "eb_n0_db", rc.convergence_eb_n0_db);
  }
  if (doc.contains("sinr")) {
    const auto& s = doc["sinr"];
    reject_unknown(s, {"snr_db", "trials", "min_trials"}, "sinr");
    if (s.contains("snr_db")) rc.sinr_snr_db = number_array(s["snr_db"], "sinr.snr_db");
    rc.sinr_trials = get_or(s, "trials", rc.sinr_trials);
    e.sinr_min_trials = get_or(s, "min_trials", e.sinr_min_trials);
  }
  if (doc.contains("throughput")) {
    const auto& t = doc["throughput"];
    reject_unknown(t, {"cdfs", "percentiles", "target", "floor_at_zero"}, "throughput");
    if (t.contains("cdfs")) {
      for (const auto& p : t["cdfs"]) rc.cdf_paths.push_back(resolve(p.get<std::string>()));
    }
    if (t.contains("percentiles")) rc.percentiles = number_array(t["percentiles"], "throughput.percentiles");
    rc.throughput_target = get_or(t, "target", rc.throughput_target);
    rc.floor_gains_at_zero = get_or(t, "floor_at_zero", rc.floor_gains_at_zero);
  }
  if (doc.contains("complexity")) {
    reject_unknown(doc["complexity"], {"measure_up_to_users"}, "complexity");
    rc.measure_up_to_users = get_or(doc["complexity"], "measure_up_to_users", rc.measure_up_to_users);
  }

  if (validate) e.validate();
  for (double p : rc.percentiles) {
    if (p < 0.0 || p > 100.0) throw ConfigError("percentiles must lie in [0, 100]");
  }
  if (rc.sinr_trials < 2) throw ConfigError("sinr.trials must be at least 2");
  return rc;
}

RunConfig load_config(const std::filesystem::path& path, bool validate) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& err) {
    throw ConfigError(path.string() + ": " + err.what());
  }
  return parse_config(doc, path.parent_path(), validate);
}

json to_json(const RunConfig& rc) {
  const auto& e = rc.experiment;
  json j;
  j["users"] = e.num_users;
  j["rx_antennas"] = e.num_rx;
  j["constellation"] = to_string(e.constellation);
  j["fading"] = to_string(e.fading);
  j["detectors"] = json::array();
  for (const auto& d : e.detectors) j["detectors"].push_back(detector_to_json(d));
  j["eb_n0_db"] = e.eb_n0_db;
  j["csi"] = {{"perfect", e.csi.perfect},
              {"pilot_offset_db", e.csi.pilot_offset_db},
              {"noise_var_mismatch", e.csi.noise_var_mismatch}};
  if (e.csi.pilot_snr_db) j["csi"]["pilot_snr_db"] = *e.csi.pilot_snr_db;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, EqualPowers>) {
          j["power"] = {{"profile", "equal"}};
        } else if constexpr (std::is_same_v<T, LognormalPowers>) {
          j["power"] = {{"profile", "lognormal"}, {"std_db", p.std_db}};
        } else {
          j["power"] = {{"profile", "file"}, {"path", p.path.string()}};
        }
      },
      e.power);
  if (e.coding) {
    auto octal = [](unsigned g) {
      std::ostringstream ss;
      ss << std::oct << g;
      return ss.str();
    };
    j["coding"] = {{"constraint_length", e.coding->code.constraint_length},
                   {"generators", {octal(e.coding->code.generators[0]), octal(e.coding->code.generators[1])}},
                   {"block_length", e.coding->block_length},
                   {"interleave", e.coding->interleave}};
  } else {
    j["coding"] = nullptr;
  }
  j["stop"] = {{"min_errors", e.stop.min_errors},
               {"max_bits", e.stop.max_bits},
               {"max_trials", e.stop.max_trials},
               {"batch_trials", e.stop.batch_trials}};
  j["seed"] = e.seed;
  j["convergence"] = {{"eb_n0_db", rc.convergence_eb_n0_db}};
  j["sinr"] = {{"snr_db", rc.sinr_snr_db}, {"trials", rc.sinr_trials}, {"min_trials", e.sinr_min_trials}};
  json cdfs = json::array();
  for (const auto& p : rc.cdf_paths) cdfs.push_back(p.string());
  j["throughput"] = {{"cdfs", cdfs},
                     {"percentiles", rc.percentiles},
                     {"target", rc.throughput_target},
                     {"floor_at_zero", rc.floor_gains_at_zero}};
  j["complexity"] = {{"measure_up_to_users", rc.measure_up_to_users}};
  return j;
}

}  // namespace mblast
