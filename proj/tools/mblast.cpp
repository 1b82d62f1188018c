#include <iostream>

#include <CLI11.hpp>

#include "mblast/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo studies of iterative multiuser detection for uplink massive MIMO"};
  app.set_version_flag("--version", mblast::kVersion);
  app.require_subcommand(1);

  mblast::CliOptions opts;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string detectors, grid;
  double eb_n0 = 0.0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", opts.config_path, "experiment config (JSON)");
    if (needs_config) c->required();
    sub->add_option("--out", opts.out_dir, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "master seed (overrides config and MBLAST_SEED)");
    sub->add_option("--workers", workers, "worker threads (0: all cores)");
    sub->add_option("--detectors", detectors, "comma-separated detectors, e.g. mmse,mblast:5");
    sub->add_option("--grid-db", grid, "comma-separated grid in dB");
  };

  auto* ber = app.add_subcommand("ber", "BER versus Eb/N0 sweep");
  add_common(ber, true);
  auto* conv = app.add_subcommand("convergence", "BER versus iteration at one Eb/N0");
  add_common(conv, true);
  conv->add_option("--eb-n0-db", eb_n0, "operating point in dB");
  auto* sinr = app.add_subcommand("sinr", "post-detection SINR transfer curves");
  add_common(sinr, true);
  auto* tput = app.add_subcommand("throughput", "percentile throughput gains from SINR CDFs");
  add_common(tput, true);
  auto* cplx = app.add_subcommand("complexity", "MAC counts, closed form and measured");
  add_common(cplx, false);
  auto* val = app.add_subcommand("validate", "check a config and print its resolved form");
  val->add_option("--config", opts.config_path, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : mblast::kExitConfig;
  }

  for (auto* sub : app.get_subcommands()) {
    auto given = [sub](const char* name) {
      const auto* o = sub->get_option_no_throw(name);
      return o && o->count() > 0;
    };
    opts.command = sub->get_name();
    if (given("--seed")) opts.seed = seed;
    if (given("--workers")) opts.workers = workers;
    if (given("--detectors")) opts.detectors = detectors;
    if (given("--grid-db")) opts.grid_db = grid;
    if (given("--eb-n0-db")) opts.eb_n0_db = eb_n0;
  }
  return mblast::run_command(opts, std::cout, std::cerr);
}
