#ifndef SAOM_REPORT_HPP
#define SAOM_REPORT_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "saom/config.hpp"
#include "saom/estimate.hpp"
#include "saom/gof.hpp"
#include "saom/selection.hpp"

namespace saom {

using nlohmann::json;

namespace detail {

inline std::string fmt(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fit serialization

struct CovariateSummary {
  double min = 0.0, max = 0.0, mean = 0.0, offset = 0.0;
  bool centered = false;
};

inline std::map<std::string, CovariateSummary> covariate_summaries(const NetworkPanel& panel) {
  std::map<std::string, CovariateSummary> out;
  for (const auto& [name, cov] : panel.covariates())
    out[name] = {cov.range_min(), cov.range_max(), cov.mean(), cov.offset(), cov.centered()};
  return out;
}

inline json estimate_to_json(const MoMResult& r,
                             const std::map<std::string, CovariateSummary>& covariates) {
  json j;
  j["converged"] = r.converged;
  j["restarts_used"] = r.restarts_used;
  j["n_phase3"] = r.n_phase3;
  j["max_conv_ratio"] = r.max_conv_ratio;
  j["seed"] = r.seed;
  j["n_rates"] = r.n_rates;
  j["gains_used"] = r.gains_used;

  json params = json::array();
  for (std::size_t k = 0; k < r.names.size(); ++k) {
    json p;
    p["name"] = r.names[k];
    p["kind"] = static_cast<int>(k) < r.n_rates ? "rate" : "effect";
    p["estimate"] = r.estimates[k];
    p["std_error"] = r.std_errors[k];
    p["target"] = r.targets[k];
    p["sim_mean"] = r.sim_means[k];
    p["sim_sd"] = r.sim_sds[k];
    p["conv_t_ratio"] = r.conv_t_ratios[k];
    params.push_back(std::move(p));
  }
  j["parameters"] = std::move(params);

  json eff = json::array();
  for (std::size_t k = 0; k < r.effects_hat.size(); ++k) {
    json e;
    e["name"] = r.effects_hat.effects[k].name();
    e["alpha"] = r.effects_hat.effects[k].alpha;
    e["beta"] = r.effects_hat.beta[k];
    eff.push_back(std::move(e));
  }
  j["effects"] = std::move(eff);
  j["rates"] = r.rates_hat.rho;

  json cov = json::array();
  for (Eigen::Index a = 0; a < r.covariance.rows(); ++a) {
    json row = json::array();
    for (Eigen::Index b = 0; b < r.covariance.cols(); ++b) row.push_back(r.covariance(a, b));
    cov.push_back(std::move(row));
  }
  j["covariance"] = std::move(cov);

  json cj;
  for (const auto& [name, c] : covariates) {
    cj[name] = {{"min", c.min}, {"max", c.max}, {"mean", c.mean},
                {"offset", c.offset}, {"centered", c.centered}};
  }
  j["covariates"] = std::move(cj);
  return j;
}

// The subset of a saved fit that downstream commands need.
struct FitData {
  std::vector<EffectSpec> effects;
  std::vector<double> beta;
  std::vector<double> rates;
  Eigen::MatrixXd covariance;  // rates first, then effects
  std::map<std::string, CovariateSummary> covariates;
  bool converged = true;

  int n_rates() const { return static_cast<int>(rates.size()); }
};

inline FitData fit_from_json(const json& j) {
  FitData f;
  f.converged = j.value("converged", true);
  for (const auto& e : j.at("effects")) {
    std::vector<EffectEntry> parsed = parse_effect_line(e.at("name").get<std::string>());
    if (parsed.size() != 1) throw ConfigError("fit file: bad effect name");
    EffectSpec spec = parsed[0].spec;
    if (e.contains("alpha")) spec.alpha = e.at("alpha").get<double>();
    f.effects.push_back(std::move(spec));
    f.beta.push_back(e.at("beta").get<double>());
  }
  f.rates = j.at("rates").get<std::vector<double>>();
  const auto& cov = j.at("covariance");
  const auto p = static_cast<Eigen::Index>(cov.size());
  f.covariance.resize(p, p);
  for (Eigen::Index a = 0; a < p; ++a)
    for (Eigen::Index b = 0; b < p; ++b)
      f.covariance(a, b) = cov.at(static_cast<std::size_t>(a)).at(static_cast<std::size_t>(b)).get<double>();
  if (j.contains("covariates")) {
    for (const auto& [name, c] : j.at("covariates").items()) {
      f.covariates[name] = {c.at("min").get<double>(), c.at("max").get<double>(),
                            c.at("mean").get<double>(), c.value("offset", 0.0),
                            c.value("centered", false)};
    }
  }
  return f;
}

inline FitData load_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open fit file");
  json j;
  try {
    in >> j;
    return fit_from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": not a usable fit file (" + e.what() + ")");
  }
}

// ---------------------------------------------------------------------------
// Quadratic selection parameters out of a fitted effect list.
//
// The natural basis is {diffSqX, altSqX, altX, egoX, egoSqX} = theta1..5.
// A fit that used egoXaltX instead of egoSqX spans the same surfaces via
// v_i^2 = (v_j - v_i)^2 + 2 v_i v_j - v_j^2, i.e. with c = coefficient of
// egoXaltX: theta5 = c/2, theta1 = c_diffSq - c/2, theta2 = c_altSq + c/2.

struct QuadraticExtraction {
  QuadraticSelection sel;
  std::optional<ThetaCov> cov;
  double offset = 0.0;
};

inline QuadraticExtraction quadratic_from_fit(const FitData& fit, const std::string& covariate,
                                              bool with_covariance = true) {
  auto find = [&](EffectKind kind) -> int {
    for (std::size_t k = 0; k < fit.effects.size(); ++k)
      if (fit.effects[k].kind == kind && fit.effects[k].covariate == covariate)
        return static_cast<int>(k);
    return -1;
  };
  const int i1 = find(EffectKind::cov_diff_sq);
  const int i2 = find(EffectKind::cov_alter_sq);
  const int i3 = find(EffectKind::cov_alter);
  const int i4 = find(EffectKind::cov_ego);
  const int i5 = find(EffectKind::cov_ego_sq);
  const int i5x = find(EffectKind::cov_ego_x_alter);

  std::string missing;
  for (const auto& [idx, name] : {std::pair{i1, "diffSqX"}, {i2, "altSqX"}, {i3, "altX"}, {i4, "egoX"}}) {
    if (idx < 0) missing += (missing.empty() ? "" : ", ") + std::string(name) + "(" + covariate + ")";
  }
  if (!missing.empty())
    throw ConfigError("selection analysis needs effects {" + missing + "} in the fit");

  QuadraticExtraction out;
  auto it = fit.covariates.find(covariate);
  if (it == fit.covariates.end())
    throw ConfigError("fit file carries no range for covariate '" + covariate + "'");
  out.sel.cov = {it->second.min, it->second.max, it->second.mean};
  out.offset = it->second.offset;

  // indices in the full parameter vector (rates first)
  std::vector<int> src{i1, i2, i3, i4};
  Eigen::MatrixXd jac;  // theta (5) = jac * c
  const double b1 = fit.beta[static_cast<std::size_t>(i1)];
  const double b2 = fit.beta[static_cast<std::size_t>(i2)];
  const double b3 = fit.beta[static_cast<std::size_t>(i3)];
  const double b4 = fit.beta[static_cast<std::size_t>(i4)];
  if (i5 >= 0 && i5x >= 0) {
    // overparameterized block with both v_i^2 and v_i v_j terms; fold
    // the product term into the (diffSq, altSq, egoSq) coordinates
    src.push_back(i5);
    src.push_back(i5x);
    const double c6 = fit.beta[static_cast<std::size_t>(i5)];
    const double c5 = fit.beta[static_cast<std::size_t>(i5x)];
    out.sel = {b1 - 0.5 * c5, b2 + 0.5 * c5, b3, b4, c6 + 0.5 * c5, out.sel.cov};
    jac = Eigen::MatrixXd::Zero(5, 6);
    jac(0, 0) = jac(1, 1) = jac(2, 2) = jac(3, 3) = jac(4, 4) = 1.0;
    jac(0, 5) = -0.5;
    jac(1, 5) = 0.5;
    jac(4, 5) = 0.5;
  } else if (i5 >= 0) {
    src.push_back(i5);
    const double b5 = fit.beta[static_cast<std::size_t>(i5)];
    out.sel = {b1, b2, b3, b4, b5, out.sel.cov};
    jac = Eigen::MatrixXd::Identity(5, 5);
  } else if (i5x >= 0) {
    src.push_back(i5x);
    const double c5 = fit.beta[static_cast<std::size_t>(i5x)];
    out.sel = {b1 - 0.5 * c5, b2 + 0.5 * c5, b3, b4, 0.5 * c5, out.sel.cov};
    jac = Eigen::MatrixXd::Identity(5, 5);
    jac(0, 4) = -0.5;
    jac(1, 4) = 0.5;
    jac(4, 4) = 0.5;
  } else {
    // four-parameter model: theta5 = 0
    out.sel = {b1, b2, b3, b4, 0.0, out.sel.cov};
    jac = Eigen::MatrixXd::Zero(5, 4);
    jac(0, 0) = jac(1, 1) = jac(2, 2) = jac(3, 3) = 1.0;
  }

  if (with_covariance && fit.covariance.size() > 0) {
    const int q = static_cast<int>(src.size());
    Eigen::MatrixXd sub(q, q);
    for (int a = 0; a < q; ++a)
      for (int b = 0; b < q; ++b)
        sub(a, b) = fit.covariance(fit.n_rates() + src[static_cast<std::size_t>(a)],
                                   fit.n_rates() + src[static_cast<std::size_t>(b)]);
    const Eigen::MatrixXd full = jac * sub * jac.transpose();
    ThetaCov tc{};
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) tc[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = full(a, b);
    out.cov = tc;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Selection analysis bundle

struct SelectionAnalysis {
  std::string covariate;
  QuadraticSelection sel;
  double offset = 0.0;
  std::optional<ThetaCov> cov;
  bool norm_defined = false;
  std::optional<NormEstimate> norm;
  std::optional<AttractionWeights> weights;
  AspirationVerdict aspiration;
  SociabilityVerdict sociability;
  SelectionTable table;
  std::vector<double> ego_values;
  int grid_resolution = 101;
  double alpha = 0.05;
};

inline SelectionAnalysis analyze_quadratic(const QuadraticSelection& sel,
                                           const std::string& covariate, double offset,
                                           const std::optional<ThetaCov>& cov,
                                           std::vector<double> ego_values,
                                           int grid_resolution = 101, double alpha = 0.05) {
  SelectionAnalysis a;
  a.covariate = covariate;
  a.sel = sel;
  a.offset = offset;
  a.cov = cov;
  a.alpha = alpha;
  a.grid_resolution = grid_resolution;

  try {
    a.norm = social_norm(sel, cov);
    a.norm_defined = true;
  } catch (const std::domain_error&) {
    a.norm_defined = false;
  }
  try {
    a.weights = attraction_weights(sel);
  } catch (const std::domain_error&) {
  }
  a.aspiration = classify_aspiration(sel, cov);
  a.sociability = classify_sociability(sel, grid_resolution);

  if (ego_values.empty()) {
    for (int k = 0; k < 6; ++k)
      ego_values.push_back(sel.cov.min + (sel.cov.max - sel.cov.min) * k / 5.0);
  } else {
    for (double v : ego_values)
      if (v < sel.cov.min || v > sel.cov.max)
        throw ConfigError("ego value " + detail::fmt(v) + " outside the covariate range");
  }
  a.ego_values = ego_values;
  a.table = selection_table(sel, ego_values, {sel.cov.min, sel.cov.max, grid_resolution});
  return a;
}

namespace detail {

inline json aspiration_test_json(const AspirationTest& t) {
  json j;
  j["combination"] = t.combination;
  j["value"] = t.value;
  j["point_condition"] = t.point_condition;
  if (t.std_error) j["std_error"] = *t.std_error; else j["std_error"] = nullptr;
  if (t.p_right) j["p_right"] = *t.p_right; else j["p_right"] = nullptr;
  return j;
}

}  // namespace detail

inline json selection_to_json(const SelectionAnalysis& a) {
  json j;
  j["covariate"] = {{"name", a.covariate}, {"min", a.sel.cov.min}, {"max", a.sel.cov.max},
                    {"mean", a.sel.cov.mean}, {"offset", a.offset}};
  j["theta"] = {a.sel.theta1, a.sel.theta2, a.sel.theta3, a.sel.theta4, a.sel.theta5};

  json norm;
  norm["defined"] = a.norm_defined;
  if (a.norm_defined) {
    norm["value"] = a.norm->value;
    norm["in_range"] = a.norm->in_range;
    if (a.norm->std_error) norm["std_error"] = *a.norm->std_error; else norm["std_error"] = nullptr;
  }
  j["social_norm"] = std::move(norm);

  json w;
  w["defined"] = a.weights.has_value();
  if (a.weights) {
    w["homophily"] = a.weights->homophily;
    w["conformity"] = a.weights->conformity;
  }
  j["attraction_weights"] = std::move(w);

  j["aspiration"] = {{"level", to_string(a.aspiration.level)},
                     {"strong", detail::aspiration_test_json(a.aspiration.strong)},
                     {"medium", detail::aspiration_test_json(a.aspiration.medium)},
                     {"weak", detail::aspiration_test_json(a.aspiration.weak)}};
  j["sociability"] = {{"strong", a.sociability.strong}, {"weak", a.sociability.weak}};

  json curve = json::array();
  for (const auto& [v, opt] : a.sociability.optimum_curve) curve.push_back({v, opt});
  j["optimum_curve"] = std::move(curve);
  j["ego_values"] = a.ego_values;
  j["grid_resolution"] = a.grid_resolution;
  j["alpha"] = a.alpha;
  return j;
}

inline std::string selection_to_text(const SelectionAnalysis& a) {
  using detail::fmt;
  std::ostringstream out;
  const auto& s = a.sel;
  out << "Selection analysis for covariate '" << a.covariate << "'\n";
  out << "  range [" << fmt(s.cov.min) << ", " << fmt(s.cov.max) << "], mean " << fmt(s.cov.mean);
  if (a.offset != 0.0) out << " (values centered; original-scale offset " << fmt(a.offset) << ")";
  out << "\n";
  out << "  theta = (" << fmt(s.theta1) << ", " << fmt(s.theta2) << ", " << fmt(s.theta3)
      << ", " << fmt(s.theta4) << ", " << fmt(s.theta5) << ")\n\n";

  out << "1. Homophily: theta1 = " << fmt(s.theta1) << " -> "
      << (s.theta1 < 0 ? "present (attraction toward similar alters)" : "absent (theta1 >= 0)");
  if (a.weights)
    out << "; attraction weight " << fmt(a.weights->homophily, 3);
  out << "\n";

  out << "2. Attachment conformity: theta2 = " << fmt(s.theta2) << ". ";
  if (!a.norm_defined) {
    out << "norm undefined (theta2 ~ 0); alter terms reduce to linear aspiration with slope "
        << fmt(s.theta3) << "\n";
  } else {
    out << "social norm V^norm = " << fmt(a.norm->value);
    if (a.norm->std_error) out << " (s.e. " << fmt(*a.norm->std_error) << ")";
    if (a.offset != 0.0) out << " [original scale " << fmt(a.norm->value + a.offset) << "]";
    out << (a.norm->in_range ? ", inside" : ", outside") << " the covariate range";
    if (a.weights) out << "; conformity weight " << fmt(a.weights->conformity, 3);
    out << "\n";
  }

  out << "3. Aspiration: level = " << to_string(a.aspiration.level) << "\n";
  auto print_test = [&](const char* name, const AspirationTest& t) {
    out << "   " << name << ": c'theta = " << fmt(t.value)
        << (t.point_condition ? " (condition holds)" : " (condition fails)");
    if (t.std_error && t.p_right) {
      out << ", s.e. " << fmt(*t.std_error) << ", one-sided p = " << fmt(*t.p_right, 3)
          << (*t.p_right < a.alpha ? " *" : "");
    }
    out << "\n";
  };
  print_test("strong", a.aspiration.strong);
  print_test("medium", a.aspiration.medium);
  print_test("weak  ", a.aspiration.weak);

  double lo = a.sociability.optimum_curve.front()[1], hi = lo;
  for (const auto& p : a.sociability.optimum_curve) {
    lo = std::min(lo, p[1]);
    hi = std::max(hi, p[1]);
  }
  out << "4. Sociability: strong = " << (a.sociability.strong ? "yes" : "no")
      << ", weak = " << (a.sociability.weak ? "yes" : "no")
      << "; optimum value spans [" << fmt(lo) << ", " << fmt(hi) << "] over the ego range\n";
  return out.str();
}

// Plot tables: selection_table.csv (`v_ego, v_alter, value`) and
// optimum_curve.csv (`v_ego, optimum`).
inline void write_selection_tables(const std::string& dir, const SelectionTable& t) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out((fs::path(dir) / "selection_table.csv").string());
    out.precision(12);
    out << "v_ego, v_alter, value\n";
    for (const auto& r : t.rows) out << r[0] << ", " << r[1] << ", " << r[2] << "\n";
  }
  {
    std::ofstream out((fs::path(dir) / "optimum_curve.csv").string());
    out.precision(12);
    out << "v_ego, optimum\n";
    for (const auto& r : t.optimum) out << r[0] << ", " << r[1] << "\n";
  }
}

// ---------------------------------------------------------------------------
// Estimation rendering

inline std::string estimate_to_text(const MoMResult& r) {
  using detail::fmt;
  std::ostringstream out;
  out << "Method-of-moments fit: " << (r.converged ? "converged" : "NOT converged")
      << " (restarts used: " << r.restarts_used << ", phase-3 runs: " << r.n_phase3 << ")\n";
  out << "max |conv t-ratio| = ";
  double tmax = 0.0;
  for (double t : r.conv_t_ratios) tmax = std::max(tmax, std::fabs(t));
  out << fmt(tmax, 3) << ", overall max convergence ratio = " << fmt(r.max_conv_ratio, 3) << "\n\n";

  char line[256];
  std::snprintf(line, sizeof(line), "%-28s %12s %12s %10s %10s\n", "parameter", "estimate",
                "(s.e.)", "t-stat", "conv-t");
  out << line;
  for (std::size_t k = 0; k < r.names.size(); ++k) {
    const double se = r.std_errors[k];
    const double t = se > 0 ? r.estimates[k] / se : 0.0;
    std::snprintf(line, sizeof(line), "%-28s %12.4f %12.4f %10.2f %10.3f\n", r.names[k].c_str(),
                  r.estimates[k], se, t, r.conv_t_ratios[k]);
    out << line;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// GOF rendering

inline json gof_to_json(const GofReport& rep, const NetworkPanel* panel = nullptr) {
  json j;
  j["family"] = to_string(rep.family);
  j["n_sim"] = rep.simulated.size();
  j["observed"] = rep.observed;
  j["mahalanobis_observed"] = rep.mahalanobis_observed;
  j["p_value"] = rep.p_value;
  j["dropped_dims"] = rep.dropped_dims;
  if (rep.family == GofFamily::triad_census) {
    j["class_names"] = triad_class_names();
    if (panel) {
      long tt = 0;
      for (int m = 1; m < panel->n_waves(); ++m) tt += transitive_triple_count(panel->wave(m));
      j["transitive_triples_observed"] = tt;
    }
  }
  return j;
}

inline std::string gof_to_text(const GofReport& rep) {
  using detail::fmt;
  std::ostringstream out;
  out << "GOF " << to_string(rep.family) << ": Mahalanobis distance = "
      << fmt(rep.mahalanobis_observed, 4) << ", p = " << fmt(rep.p_value, 4);
  if (!rep.dropped_dims.empty()) {
    out << "  [warning: dropped " << rep.dropped_dims.size()
        << " zero-variance statistic dimension(s)]";
  }
  out << "\n";
  return out.str();
}

// Violin-plot data: `statistic_index, run, value`; the observation is
// written with run = -1.
inline void write_gof_table(const std::string& path, const GofReport& rep) {
  std::ofstream out(path);
  if (!out) throw IngestError(path + ": cannot write");
  out.precision(12);
  out << "statistic_index, run, value\n";
  for (std::size_t d = 0; d < rep.observed.size(); ++d)
    out << d << ", -1, " << rep.observed[d] << "\n";
  for (std::size_t r = 0; r < rep.simulated.size(); ++r)
    for (std::size_t d = 0; d < rep.simulated[r].size(); ++d)
      out << d << ", " << r << ", " << rep.simulated[r][d] << "\n";
}

}  // namespace saom

#endif
