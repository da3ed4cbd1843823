#ifndef SAOM_CONFIG_HPP
#define SAOM_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "saom/effects.hpp"
#include "saom/errors.hpp"
#include "saom/estimate.hpp"
#include "saom/gof.hpp"
#include "saom/ingest.hpp"
#include "saom/selection.hpp"

namespace saom {

// ---------------------------------------------------------------------------
// Generic section/key-value file:
//   [section optional-argument]
//   key = value            (repeated keys keep their order)
//   # comment

struct ConfigSection {
  std::string name;
  std::string arg;
  std::vector<std::pair<std::string, std::string>> entries;

  std::vector<std::string> values(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries)
      if (k == key) out.push_back(v);
    return out;
  }

  std::optional<std::string> value(const std::string& key) const {
    std::optional<std::string> out;
    for (const auto& [k, v] : entries)
      if (k == key) {
        if (out) throw ConfigError("config: key '" + key + "' given more than once in [" + name + "]");
        out = v;
      }
    return out;
  }
};

struct ConfigFile {
  std::vector<ConfigSection> sections;

  const ConfigSection* find(const std::string& name, const std::string& arg = "") const {
    for (const auto& s : sections)
      if (s.name == name && (arg.empty() || s.arg == arg)) return &s;
    return nullptr;
  }

  std::vector<const ConfigSection*> all(const std::string& name) const {
    std::vector<const ConfigSection*> out;
    for (const auto& s : sections)
      if (s.name == name) out.push_back(&s);
    return out;
  }
};

inline ConfigFile parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  ConfigFile cfg;
  std::string line;
  int lineno = 0;
  ConfigSection* current = nullptr;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = detail::trim(line);
    const std::size_t hash = t.find('#');
    if (hash != std::string::npos) t = detail::trim(t.substr(0, hash));
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError(path + ":" + std::to_string(lineno) + ": malformed section header");
      const std::string inner = detail::trim(t.substr(1, t.size() - 2));
      const std::size_t sp = inner.find_first_of(" \t");
      ConfigSection s;
      if (sp == std::string::npos) {
        s.name = inner;
      } else {
        s.name = inner.substr(0, sp);
        s.arg = detail::trim(inner.substr(sp + 1));
      }
      if (s.name.empty())
        throw ConfigError(path + ":" + std::to_string(lineno) + ": empty section name");
      cfg.sections.push_back(std::move(s));
      current = &cfg.sections.back();
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    if (!current)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": key outside of any section");
    current->entries.emplace_back(detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Effect grammar: "name", "name(covariate)", options "alpha=A", leading
// numeric tokens are parameter values. quadratic(V) expands to the five
// effects diffSqX altSqX altX egoX egoSqX on V, value order theta1..theta5.

namespace detail {

inline bool parse_double(const std::string& s, double& out) {
  try {
    std::size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

inline std::optional<EffectKind> effect_kind_by_name(const std::string& name) {
  static const std::map<std::string, EffectKind> table = {
      {"outdegree", EffectKind::outdegree},
      {"density", EffectKind::outdegree},
      {"reciprocity", EffectKind::reciprocity},
      {"gwesp", EffectKind::gwesp},
      {"recipGwesp", EffectKind::reciprocity_gwesp},
      {"inPop", EffectKind::indegree_popularity},
      {"outPop", EffectKind::outdegree_popularity},
      {"outAct", EffectKind::outdegree_activity},
      {"egoX", EffectKind::cov_ego},
      {"altX", EffectKind::cov_alter},
      {"altSqX", EffectKind::cov_alter_sq},
      {"egoSqX", EffectKind::cov_ego_sq},
      {"diffSqX", EffectKind::cov_diff_sq},
      {"egoXaltX", EffectKind::cov_ego_x_alter},
      {"sameX", EffectKind::cov_same},
  };
  auto it = table.find(name);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

}  // namespace detail

struct EffectEntry {
  EffectSpec spec;
  std::optional<double> value;
};

inline std::vector<EffectEntry> parse_effect_line(const std::string& text) {
  std::vector<std::string> toks = detail::split_ws(text);
  if (toks.empty()) throw ConfigError("empty effect specification");

  std::string head = toks[0];
  std::string covariate;
  const std::size_t paren = head.find('(');
  if (paren != std::string::npos) {
    if (head.back() != ')')
      throw ConfigError("effect '" + head + "': malformed covariate argument");
    covariate = head.substr(paren + 1, head.size() - paren - 2);
    head = head.substr(0, paren);
    if (covariate.empty()) throw ConfigError("effect '" + head + "': empty covariate name");
  }

  std::vector<double> values;
  double alpha = kDefaultGwespAlpha;
  for (std::size_t k = 1; k < toks.size(); ++k) {
    const std::string& tok = toks[k];
    double x;
    if (tok.rfind("alpha=", 0) == 0) {
      if (!detail::parse_double(tok.substr(6), x))
        throw ConfigError("effect '" + head + "': bad alpha '" + tok + "'");
      alpha = x;
    } else if (detail::parse_double(tok, x)) {
      values.push_back(x);
    } else {
      throw ConfigError("effect '" + head + "': unexpected token '" + tok + "'");
    }
  }

  std::vector<EffectEntry> out;
  if (head == "quadratic") {
    if (covariate.empty()) throw ConfigError("quadratic(...) requires a covariate");
    if (!values.empty() && values.size() != 5)
      throw ConfigError("quadratic(" + covariate + "): expected 5 values (theta1..theta5), got " +
                        std::to_string(values.size()));
    const EffectKind kinds[5] = {EffectKind::cov_diff_sq, EffectKind::cov_alter_sq,
                                 EffectKind::cov_alter, EffectKind::cov_ego,
                                 EffectKind::cov_ego_sq};
    for (int k = 0; k < 5; ++k) {
      EffectEntry e{EffectSpec::with_covariate(kinds[k], covariate), std::nullopt};
      if (!values.empty()) e.value = values[static_cast<std::size_t>(k)];
      out.push_back(std::move(e));
    }
    return out;
  }

  const auto kind = detail::effect_kind_by_name(head);
  if (!kind) throw ConfigError("unknown effect '" + head + "'");
  if (values.size() > 1)
    throw ConfigError("effect '" + head + "': more than one value given");
  EffectSpec spec = is_covariate_kind(*kind) ? EffectSpec::with_covariate(*kind, covariate)
                                             : EffectSpec{*kind, "", alpha};
  if (!is_covariate_kind(*kind) && !covariate.empty())
    throw ConfigError("structural effect '" + head + "' does not take a covariate");
  spec.validate();
  EffectEntry e{std::move(spec), std::nullopt};
  if (!values.empty()) e.value = values[0];
  out.push_back(std::move(e));
  return out;
}

// ---------------------------------------------------------------------------
// Whole-model configuration

struct SelectionConfig {
  std::string covariate;
  std::optional<std::array<double, 5>> theta;  // raw theta input
  std::optional<CovariateRange> range;         // analysis scale, for raw theta
  std::optional<ThetaCov> covariance;
  std::vector<double> ego_values;              // optional explicit ego grid
};

struct GofConfig {
  int n_sim = 1000;
  std::vector<GofFamily> families = {
      GofFamily::indegree_distribution, GofFamily::outdegree_distribution,
      GofFamily::geodesic_distribution, GofFamily::triad_census};
  std::optional<std::uint64_t> seed;
};

struct SimulateConfig {
  std::optional<int> periods;
  std::optional<std::uint64_t> seed;
  long max_events = 1000000;
};

struct ModelConfig {
  std::vector<std::string> wave_files;
  std::optional<std::string> actors_file;
  std::vector<CovariateDef> covariates;
  std::vector<EffectEntry> effects;
  std::vector<double> rates;
  EstimationOptions estimation;
  SimulateConfig simulation;
  GofConfig gof;
  std::optional<SelectionConfig> selection;

  std::vector<EffectSpec> effect_specs() const {
    std::vector<EffectSpec> out;
    out.reserve(effects.size());
    for (const auto& e : effects) out.push_back(e.spec);
    return out;
  }

  std::vector<double> effect_values_or(double fallback) const {
    std::vector<double> out;
    out.reserve(effects.size());
    for (const auto& e : effects) out.push_back(e.value.value_or(fallback));
    return out;
  }

  NetworkPanel ingest() const {
    NetworkPanel panel = ingest_panel(wave_files, covariates, actors_file);
    for (const auto& e : effects)
      if (is_covariate_kind(e.spec.kind) && !panel.covariates().count(e.spec.covariate))
        throw ConfigError("effect '" + e.spec.name() + "': covariate '" + e.spec.covariate +
                          "' is not defined in the config");
    return panel;
  }
};

namespace detail {

inline double require_double(const std::string& s, const std::string& what) {
  double x;
  if (!parse_double(s, x)) throw ConfigError(what + ": bad number '" + s + "'");
  return x;
}

inline std::uint64_t require_u64(const std::string& s, const std::string& what) {
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw ConfigError(what + ": bad integer '" + s + "'");
  }
}

inline std::string resolve_path(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path fp(p);
  if (fp.is_absolute()) return fp.string();
  return (base / fp).string();
}

}  // namespace detail

inline ModelConfig parse_model_config(const std::string& path) {
  const ConfigFile cfg = parse_config_file(path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  ModelConfig mc;

  if (const ConfigSection* panel = cfg.find("panel")) {
    for (const std::string& w : panel->values("wave"))
      mc.wave_files.push_back(detail::resolve_path(base, w));
    if (auto a = panel->value("actors")) mc.actors_file = detail::resolve_path(base, *a);
  }

  for (const ConfigSection* cs : cfg.all("covariate")) {
    if (cs->arg.empty()) throw ConfigError("config: [covariate] needs a name, e.g. [covariate grades]");
    CovariateDef def;
    def.name = cs->arg;
    auto file = cs->value("file");
    if (!file) throw ConfigError("covariate '" + def.name + "': missing file");
    def.file = detail::resolve_path(base, *file);
    if (auto c = cs->value("center")) def.center = (*c == "true" || *c == "1" || *c == "yes");
    if (auto r = cs->value("range")) {
      const auto toks = detail::split_ws(*r);
      if (toks.size() != 2)
        throw ConfigError("covariate '" + def.name + "': range expects two numbers");
      def.declared_range = {detail::require_double(toks[0], "range"),
                            detail::require_double(toks[1], "range")};
    }
    mc.covariates.push_back(std::move(def));
  }

  if (const ConfigSection* eff = cfg.find("effects")) {
    for (const std::string& line : eff->values("effect"))
      for (EffectEntry& e : parse_effect_line(line)) mc.effects.push_back(std::move(e));
  }

  if (const ConfigSection* rates = cfg.find("rates")) {
    for (const std::string& r : rates->values("rate"))
      mc.rates.push_back(detail::require_double(r, "rate"));
  }

  if (const ConfigSection* est = cfg.find("estimation")) {
    EstimationOptions& o = mc.estimation;
    if (auto v = est->value("phase1_runs")) o.phase1_runs = static_cast<int>(detail::require_u64(*v, "phase1_runs"));
    if (auto v = est->value("subphases")) o.phase2_subphases = static_cast<int>(detail::require_u64(*v, "subphases"));
    if (auto v = est->value("gain")) o.gain_initial = detail::require_double(*v, "gain");
    if (auto v = est->value("phase3_runs")) o.phase3_runs = static_cast<int>(detail::require_u64(*v, "phase3_runs"));
    if (auto v = est->value("phase3_deriv_runs")) o.phase3_deriv_runs = static_cast<int>(detail::require_u64(*v, "phase3_deriv_runs"));
    if (auto v = est->value("seed")) o.seed = detail::require_u64(*v, "seed");
    if (auto v = est->value("max_restarts")) o.max_restarts = static_cast<int>(detail::require_u64(*v, "max_restarts"));
    if (auto v = est->value("max_events")) o.max_events = static_cast<long>(detail::require_u64(*v, "max_events"));
    if (auto v = est->value("threads")) o.threads = static_cast<int>(detail::require_u64(*v, "threads"));
  }

  if (const ConfigSection* sim = cfg.find("simulation")) {
    if (auto v = sim->value("periods")) mc.simulation.periods = static_cast<int>(detail::require_u64(*v, "periods"));
    if (auto v = sim->value("seed")) mc.simulation.seed = detail::require_u64(*v, "seed");
    if (auto v = sim->value("max_events")) mc.simulation.max_events = static_cast<long>(detail::require_u64(*v, "max_events"));
  }

  if (const ConfigSection* g = cfg.find("gof")) {
    if (auto v = g->value("nsim")) mc.gof.n_sim = static_cast<int>(detail::require_u64(*v, "nsim"));
    if (auto v = g->value("seed")) mc.gof.seed = detail::require_u64(*v, "seed");
    const auto fams = g->values("family");
    if (!fams.empty()) {
      mc.gof.families.clear();
      for (const std::string& f : fams) {
        if (f == "indegree") mc.gof.families.push_back(GofFamily::indegree_distribution);
        else if (f == "outdegree") mc.gof.families.push_back(GofFamily::outdegree_distribution);
        else if (f == "geodesic") mc.gof.families.push_back(GofFamily::geodesic_distribution);
        else if (f == "triad") mc.gof.families.push_back(GofFamily::triad_census);
        else throw ConfigError("gof: unknown family '" + f + "' (use indegree/outdegree/geodesic/triad)");
      }
    }
  }

  if (const ConfigSection* sel = cfg.find("selection")) {
    SelectionConfig sc;
    if (auto c = sel->value("covariate")) sc.covariate = *c;
    if (sc.covariate.empty()) throw ConfigError("[selection]: missing covariate name");
    if (auto t = sel->value("theta")) {
      const auto toks = detail::split_ws(*t);
      if (toks.size() != 5) throw ConfigError("[selection]: theta expects 5 values");
      std::array<double, 5> th{};
      for (int k = 0; k < 5; ++k) th[static_cast<std::size_t>(k)] = detail::require_double(toks[static_cast<std::size_t>(k)], "theta");
      sc.theta = th;
    }
    if (auto r = sel->value("range")) {
      const auto toks = detail::split_ws(*r);
      if (toks.size() != 2 && toks.size() != 3)
        throw ConfigError("[selection]: range expects 'min max [mean]'");
      CovariateRange cr;
      cr.min = detail::require_double(toks[0], "range");
      cr.max = detail::require_double(toks[1], "range");
      cr.mean = toks.size() == 3 ? detail::require_double(toks[2], "range") : 0.0;
      sc.range = cr;
    }
    const auto cov_rows = sel->values("cov");
    if (!cov_rows.empty()) {
      if (cov_rows.size() != 5) throw ConfigError("[selection]: cov expects 5 rows of 5 numbers");
      ThetaCov m{};
      for (int r = 0; r < 5; ++r) {
        const auto toks = detail::split_ws(cov_rows[static_cast<std::size_t>(r)]);
        if (toks.size() != 5) throw ConfigError("[selection]: cov row " + std::to_string(r + 1) + " needs 5 numbers");
        for (int c = 0; c < 5; ++c)
          m[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
              detail::require_double(toks[static_cast<std::size_t>(c)], "cov");
      }
      sc.covariance = m;
    }
    if (auto e = sel->value("ego_values")) {
      for (const std::string& tok : detail::split_ws(*e))
        sc.ego_values.push_back(detail::require_double(tok, "ego_values"));
    }
    mc.selection = std::move(sc);
  }

  return mc;
}

}  // namespace saom

#endif
