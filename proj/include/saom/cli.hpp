#ifndef SAOM_CLI_HPP
#define SAOM_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "saom/config.hpp"
#include "saom/estimate.hpp"
#include "saom/gof.hpp"
#include "saom/ingest.hpp"
#include "saom/report.hpp"
#include "saom/simulate.hpp"

namespace saom::cli {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitIngest = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitConfig = 4;

struct CliOptions {
  std::string config;
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  int threads = 1;
  int grid_resolution = 101;
  std::string fit;             // path to a saved estimate.json
  std::optional<int> nsim;     // gof override
  std::optional<int> periods;  // simulate override
  bool quiet = false;
};

namespace detail {

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IngestError(path + ": cannot write");
  out << text;
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IngestError(path + ": cannot write");
  out << j.dump(2) << '\n';
}

inline std::filesystem::path out_path(const CliOptions& o, const std::string& name) {
  std::filesystem::create_directories(o.out);
  return std::filesystem::path(o.out) / name;
}

}  // namespace detail

// saom simulate: run the model forward from the first wave in the
// config, write the simulated panel and a run summary.
inline int cmd_simulate(const CliOptions& opts) {
  const ModelConfig mc = parse_model_config(opts.config);
  if (mc.wave_files.empty()) throw ConfigError("simulate: config has no [panel] wave");
  NetworkPanel start = ingest_panel(mc.wave_files, mc.covariates, mc.actors_file, 1);

  RateParameters rates{mc.rates};
  int periods = opts.periods.value_or(
      mc.simulation.periods.value_or(static_cast<int>(rates.rho.size())));
  if (periods <= 0) throw ConfigError("simulate: no periods (give [rates] or periods)");
  if (static_cast<int>(rates.rho.size()) < periods)
    throw ConfigError("simulate: " + std::to_string(periods) + " periods but only " +
                      std::to_string(rates.rho.size()) + " rate(s)");

  ParameterVector params(mc.effect_specs(), mc.effect_values_or(0.0));
  SimOptions sim_opts;
  sim_opts.seed = opts.seed.value_or(mc.simulation.seed.value_or(1));
  sim_opts.max_events = mc.simulation.max_events;

  PanelSimResult res = simulate_panel(start.wave(0), params, rates, start.covariates(), periods,
                                      sim_opts, start.actor_labels());
  write_panel(opts.out, res.panel);

  json j;
  j["seed"] = sim_opts.seed;
  j["periods"] = periods;
  j["event_counts"] = res.event_counts;
  j["truncated"] = res.truncated;
  j["rates"] = std::vector<double>(rates.rho.begin(), rates.rho.begin() + periods);
  json eff = json::array();
  for (std::size_t k = 0; k < params.size(); ++k)
    eff.push_back({{"name", params.effects[k].name()}, {"beta", params.beta[k]}});
  j["effects"] = std::move(eff);
  detail::write_json_file(detail::out_path(opts, "simulate.json").string(), j);

  if (res.truncated)
    std::cerr << "warning: max_events reached; simulate.json carries truncated = true\n";
  if (!opts.quiet)
    std::cout << "simulated " << periods << " period(s) -> " << opts.out << "\n";
  return kExitOk;
}

// saom estimate: method-of-moments fit of the configured model.
inline int cmd_estimate(const CliOptions& opts) {
  const ModelConfig mc = parse_model_config(opts.config);
  if (mc.effects.empty()) throw ConfigError("estimate: config has no [effects]");
  NetworkPanel panel = mc.ingest();

  EstimationOptions eo = mc.estimation;
  if (opts.seed) eo.seed = *opts.seed;
  eo.threads = opts.threads;
  bool any_start = false;
  for (const auto& e : mc.effects) any_start = any_start || e.value.has_value();
  if (any_start) eo.start_beta = mc.effect_values_or(0.0);
  if (!mc.rates.empty()) {
    if (static_cast<int>(mc.rates.size()) != panel.n_periods())
      throw ConfigError("estimate: [rates] must have one entry per period");
    eo.start_rates = mc.rates;
  }

  MoMResult res = estimate(panel, mc.effect_specs(), eo);

  detail::write_json_file(detail::out_path(opts, "estimate.json").string(),
                          estimate_to_json(res, covariate_summaries(panel)));
  const std::string text = estimate_to_text(res);
  detail::write_text_file(detail::out_path(opts, "estimate.txt").string(), text);
  if (!opts.quiet) std::cout << text;
  return res.converged ? kExitOk : kExitNotConverged;
}

// saom analyze-selection: interpretation bundle for the quadratic
// selection function, from a saved fit or from raw theta input.
inline int cmd_analyze_selection(const CliOptions& opts) {
  const ModelConfig mc = parse_model_config(opts.config);
  if (!mc.selection) throw ConfigError("analyze-selection: config has no [selection] section");
  const SelectionConfig& sc = *mc.selection;

  QuadraticSelection sel;
  std::optional<ThetaCov> cov;
  double offset = 0.0;

  if (!opts.fit.empty()) {
    const FitData fit = load_fit(opts.fit);
    QuadraticExtraction ex = quadratic_from_fit(fit, sc.covariate);
    sel = ex.sel;
    cov = ex.cov;
    offset = ex.offset;
  } else if (sc.theta) {
    sel.theta1 = (*sc.theta)[0];
    sel.theta2 = (*sc.theta)[1];
    sel.theta3 = (*sc.theta)[2];
    sel.theta4 = (*sc.theta)[3];
    sel.theta5 = (*sc.theta)[4];
    cov = sc.covariance;
    if (sc.range) {
      sel.cov = *sc.range;
    } else {
      // fall back to an ingested covariate for the range
      bool found = false;
      for (const auto& def : mc.covariates) found = found || def.name == sc.covariate;
      if (!found || mc.wave_files.empty())
        throw ConfigError("analyze-selection: raw theta needs a [selection] range or an "
                          "ingestable covariate '" + sc.covariate + "'");
      NetworkPanel panel = ingest_panel(mc.wave_files, mc.covariates, mc.actors_file, 1);
      const ActorCovariate& c = panel.covariate(sc.covariate);
      sel.cov = c.range();
      offset = c.offset();
    }
  } else {
    throw ConfigError("analyze-selection: give --fit FILE or [selection] theta");
  }

  SelectionAnalysis a = analyze_quadratic(sel, sc.covariate, offset, cov, sc.ego_values,
                                          opts.grid_resolution);
  detail::write_json_file(detail::out_path(opts, "selection.json").string(), selection_to_json(a));
  const std::string text = selection_to_text(a);
  detail::write_text_file(detail::out_path(opts, "selection.txt").string(), text);
  write_selection_tables(opts.out, a.table);
  if (!opts.quiet) std::cout << text;
  return kExitOk;
}

// saom gof: simulation-based goodness of fit per statistic family.
inline int cmd_gof(const CliOptions& opts) {
  const ModelConfig mc = parse_model_config(opts.config);
  NetworkPanel panel = mc.ingest();

  ParameterVector params;
  RateParameters rates;
  if (!opts.fit.empty()) {
    const FitData fit = load_fit(opts.fit);
    params = ParameterVector(fit.effects, fit.beta);
    rates.rho = fit.rates;
  } else {
    params = ParameterVector(mc.effect_specs(), mc.effect_values_or(0.0));
    rates.rho = mc.rates;
  }
  if (static_cast<int>(rates.rho.size()) != panel.n_periods())
    throw ConfigError("gof: need one rate per period (from --fit or [rates])");

  const int n_sim = opts.nsim.value_or(mc.gof.n_sim);
  const std::uint64_t seed = opts.seed.value_or(mc.gof.seed.value_or(1));

  std::ostringstream text;
  for (GofFamily fam : mc.gof.families) {
    GofReport rep = gof(panel, params, rates, fam, n_sim, seed, opts.threads);
    const std::string base = "gof_" + to_string(fam);
    detail::write_json_file(detail::out_path(opts, base + ".json").string(),
                            gof_to_json(rep, &panel));
    write_gof_table(detail::out_path(opts, base + ".csv").string(), rep);
    text << gof_to_text(rep);
  }
  detail::write_text_file(detail::out_path(opts, "gof.txt").string(), text.str());
  if (!opts.quiet) std::cout << text.str();
  return kExitOk;
}

// saom report: render saved machine-readable results as text.
inline int cmd_report(const CliOptions& opts) {
  namespace fs = std::filesystem;
  const fs::path dir = opts.out;
  if (!fs::is_directory(dir))
    throw ConfigError("report: '" + dir.string() + "' is not a directory");
  std::ostringstream text;
  bool found = false;

  if (fs::exists(dir / "estimate.json")) {
    std::ifstream in((dir / "estimate.json").string());
    json j;
    in >> j;
    found = true;
    text << "== Estimation ==\n";
    text << (j.value("converged", false) ? "converged" : "NOT converged")
         << ", max convergence ratio " << j.value("max_conv_ratio", 0.0) << "\n";
    for (const auto& p : j.at("parameters"))
      text << "  " << p.at("name").get<std::string>() << " = " << p.at("estimate").get<double>()
           << " (s.e. " << p.at("std_error").get<double>() << ")\n";
    text << "\n";
  }
  if (fs::exists(dir / "selection.json")) {
    std::ifstream in((dir / "selection.json").string());
    json j;
    in >> j;
    found = true;
    text << "== Selection analysis (" << j.at("covariate").at("name").get<std::string>() << ") ==\n";
    text << "  aspiration level: " << j.at("aspiration").at("level").get<std::string>() << "\n";
    const auto& norm = j.at("social_norm");
    if (norm.value("defined", false))
      text << "  social norm: " << norm.at("value").get<double>()
           << (norm.value("in_range", false) ? " (in range)" : " (outside range)") << "\n";
    else
      text << "  social norm: undefined\n";
    text << "  sociability: strong=" << (j.at("sociability").at("strong").get<bool>() ? "yes" : "no")
         << " weak=" << (j.at("sociability").at("weak").get<bool>() ? "yes" : "no") << "\n\n";
  }
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("gof_", 0) == 0 && entry.path().extension() == ".json") {
      std::ifstream in(entry.path().string());
      json j;
      in >> j;
      found = true;
      text << "== GOF " << j.at("family").get<std::string>() << " ==\n  p = "
           << j.at("p_value").get<double>() << " (Mahalanobis "
           << j.at("mahalanobis_observed").get<double>() << ")\n";
    }
  }
  if (!found) throw ConfigError("report: no result files found in '" + dir.string() + "'");
  detail::write_text_file((dir / "report.txt").string(), text.str());
  if (!opts.quiet) std::cout << text.str();
  return kExitOk;
}

}  // namespace saom::cli

#endif
