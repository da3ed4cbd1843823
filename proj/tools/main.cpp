#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <iostream>

#include "saom/cli.hpp"

namespace {

void add_common_flags(CLI::App* cmd, saom::cli::CliOptions& opts, std::uint64_t& seed_slot,
                      bool& seed_set) {
  cmd->add_option("--config", opts.config, "model configuration file")->required();
  cmd->add_option("--out", opts.out, "output directory");
  cmd->add_option("--seed", seed_slot, "RNG seed (overrides the config)")
      ->each([&seed_set](const std::string&) { seed_set = true; });
  cmd->add_option("--threads", opts.threads, "worker threads for simulation batches");
  cmd->add_flag("--quiet", opts.quiet, "suppress stdout summaries");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic actor-oriented network dynamics: simulation, "
               "method-of-moments estimation, selection analysis, GOF"};
  app.require_subcommand(1);

  saom::cli::CliOptions opts;
  std::uint64_t seed_slot = 0;
  bool seed_set = false;
  int periods = 0;
  bool periods_set = false;
  int nsim = 0;
  bool nsim_set = false;

  CLI::App* sim = app.add_subcommand("simulate", "simulate panel waves forward from the first wave");
  add_common_flags(sim, opts, seed_slot, seed_set);
  sim->add_option("--periods", periods, "number of periods to simulate")
      ->each([&periods_set](const std::string&) { periods_set = true; });

  CLI::App* est = app.add_subcommand("estimate", "method-of-moments fit");
  add_common_flags(est, opts, seed_slot, seed_set);

  CLI::App* sel = app.add_subcommand("analyze-selection", "quadratic selection-function analysis");
  add_common_flags(sel, opts, seed_slot, seed_set);
  sel->add_option("--fit", opts.fit, "estimate.json from a previous fit");
  sel->add_option("--grid-resolution", opts.grid_resolution, "alter-grid points for tables");

  CLI::App* gf = app.add_subcommand("gof", "simulation-based goodness of fit");
  add_common_flags(gf, opts, seed_slot, seed_set);
  gf->add_option("--fit", opts.fit, "estimate.json from a previous fit");
  gf->add_option("--nsim", nsim, "simulated networks per period")
      ->each([&nsim_set](const std::string&) { nsim_set = true; });

  CLI::App* rep = app.add_subcommand("report", "render saved results as text");
  rep->add_option("--out", opts.out, "directory holding result files")->required();
  rep->add_flag("--quiet", opts.quiet, "suppress stdout summaries");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (seed_set) opts.seed = seed_slot;
  if (periods_set) opts.periods = periods;
  if (nsim_set) opts.nsim = nsim;

  try {
    if (sim->parsed()) return saom::cli::cmd_simulate(opts);
    if (est->parsed()) return saom::cli::cmd_estimate(opts);
    if (sel->parsed()) return saom::cli::cmd_analyze_selection(opts);
    if (gf->parsed()) return saom::cli::cmd_gof(opts);
    if (rep->parsed()) return saom::cli::cmd_report(opts);
  } catch (const saom::IngestError& e) {
    std::cerr << "ingest error: " << e.what() << "\n";
    return saom::cli::kExitIngest;
  } catch (const saom::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return saom::cli::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return saom::cli::kExitFailure;
  }
  return saom::cli::kExitFailure;
}
