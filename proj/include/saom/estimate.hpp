#ifndef SAOM_ESTIMATE_HPP
#define SAOM_ESTIMATE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "saom/effects.hpp"
#include "saom/linalg.hpp"
#include "saom/mathutil.hpp"
#include "saom/network.hpp"
#include "saom/parallel.hpp"
#include "saom/random.hpp"
#include "saom/simulate.hpp"

namespace saom {

struct EstimationOptions {
  int phase1_runs = 50;
  int phase2_subphases = 4;
  double gain_initial = 0.2;
  double phase2_length_mult = 2.0;  // scales the (7+p) 2.52^k subphase lengths
  int phase3_runs = 1000;
  int phase3_deriv_runs = 200;  // runs reused for the derivative refresh at theta-hat
  std::uint64_t seed = 1;
  int max_restarts = 3;
  double t_ratio_threshold = 0.1;
  double max_ratio_threshold = 0.25;
  // finite-difference step 0.1 * max(|theta_k|, floor_k), where floor_k
  // = fd_step_floor divided by the per-tie magnitude of the statistic.
  // The scaling keeps the utility perturbation of one tie change at a
  // comparable size for every effect: large enough to rise above the
  // simulation noise, small enough to stay in the linear regime.
  double fd_step_rel = 0.1;
  double fd_step_floor = 2.0;
  double max_step = 1.0;      // per-component Robbins-Monro step cap
  long max_events = 1000000;  // per simulated period
  int threads = 1;
  std::optional<std::vector<double>> start_beta;
  std::optional<std::vector<double>> start_rates;
};

// Gain sequence across phase-2 subphases: halved each subphase.
inline std::vector<double> phase2_gains(const EstimationOptions& opts) {
  std::vector<double> g;
  double a = opts.gain_initial;
  for (int s = 0; s < opts.phase2_subphases; ++s, a *= 0.5) g.push_back(a);
  return g;
}

// Method-of-moments fit: estimates, covariance and the convergence
// diagnostics of the final phase-3 check.
struct MoMResult {
  std::vector<std::string> names;  // rates first, then effects
  std::vector<double> estimates;
  int n_rates = 0;
  ParameterVector effects_hat;
  RateParameters rates_hat;
  Eigen::MatrixXd covariance;
  std::vector<double> std_errors;
  std::vector<double> targets;
  std::vector<double> sim_means;
  std::vector<double> sim_sds;
  std::vector<double> conv_t_ratios;
  double max_conv_ratio = 0.0;
  int n_phase3 = 0;
  bool converged = false;
  int restarts_used = 0;
  std::vector<double> gains_used;
  std::uint64_t seed = 0;
};

inline std::vector<std::string> parameter_names(int n_periods,
                                                const std::vector<EffectSpec>& effects) {
  std::vector<std::string> names;
  for (int m = 0; m < n_periods; ++m) names.push_back("rate (period " + std::to_string(m + 1) + ")");
  for (const auto& e : effects) names.push_back(e.name());
  return names;
}

// Observed moment targets under conditioning on the first wave: for each
// period the Hamming distance between consecutive waves (rate targets),
// then for each effect the statistic total at the end wave, summed over
// periods.
inline std::vector<double> target_statistics(const NetworkPanel& panel,
                                             const std::vector<EffectSpec>& effects) {
  if (panel.n_waves() < 2) throw std::invalid_argument("target_statistics: need >= 2 waves");
  std::vector<double> t;
  for (int m = 0; m + 1 < panel.n_waves(); ++m)
    t.push_back(hamming_distance(panel.wave(m), panel.wave(m + 1)));
  for (const auto& e : effects) {
    double total = 0.0;
    for (int m = 1; m < panel.n_waves(); ++m)
      total += statistic_total(e, panel.wave(m), panel.covariates());
    t.push_back(total);
  }
  return t;
}

namespace detail {

// One panel pass at parameters theta = (rates..., betas...). Period m of
// run (s0, s1, s2) draws from substream (s0, s1, s2, m); variants that
// should share random numbers pass the same (s0, s1, s2).
inline std::vector<double> panel_statistics(const NetworkPanel& panel,
                                            const std::vector<EffectSpec>& effects,
                                            const std::vector<double>& theta,
                                            const EstimationOptions& opts, std::uint64_t s0,
                                            std::uint64_t s1, std::uint64_t s2) {
  const int periods = panel.n_periods();
  const int p_eff = static_cast<int>(effects.size());
  ParameterVector params(effects,
                         std::vector<double>(theta.begin() + periods, theta.end()));
  SimOptions sim_opts;
  sim_opts.max_events = opts.max_events;

  std::vector<double> stats(static_cast<std::size_t>(periods + p_eff), 0.0);
  for (int m = 0; m < periods; ++m) {
    RandomEngine rng = RandomEngine::substream(opts.seed, {s0, s1, s2, static_cast<std::uint64_t>(m)});
    const double rho = std::max(theta[static_cast<std::size_t>(m)], 0.0);
    SimResult r = simulate_period(panel.wave(m), params, rho, panel.covariates(), sim_opts, rng);
    stats[static_cast<std::size_t>(m)] = hamming_distance(panel.wave(m), r.end);
    for (int k = 0; k < p_eff; ++k)
      stats[static_cast<std::size_t>(periods + k)] +=
          statistic_total(effects[static_cast<std::size_t>(k)], r.end, panel.covariates());
  }
  return stats;
}

// Typical magnitude of a one-tie change of each statistic; rate
// parameters use 1 (their scale is the event count itself).
inline std::vector<double> fd_scales(const NetworkPanel& panel,
                                     const std::vector<EffectSpec>& effects) {
  const int n = panel.n_actors();
  double mean_degree = 0.0;
  for (int m = 1; m < panel.n_waves(); ++m) mean_degree += panel.wave(m).tie_count();
  mean_degree /= (panel.n_waves() - 1) * static_cast<double>(n);

  std::vector<double> s(static_cast<std::size_t>(panel.n_periods()), 1.0);
  for (const auto& e : effects) {
    double scale = 1.0;
    switch (e.kind) {
      case EffectKind::indegree_popularity:
      case EffectKind::outdegree_popularity:
        scale = std::max(1.0, mean_degree);
        break;
      case EffectKind::outdegree_activity:
        scale = std::max(1.0, 2.0 * mean_degree);
        break;
      default:
        if (is_covariate_kind(e.kind)) {
          const ActorCovariate& cov = covariate_for(e, panel.covariates());
          double sum = 0.0;
          long pairs = 0;
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
              if (i == j) continue;
              sum += std::fabs(dyadic_value(e.kind, cov.value(i), cov.value(j)));
              ++pairs;
            }
          scale = std::max(sum / static_cast<double>(pairs), 1e-6);
        }
        break;
    }
    s.push_back(scale);
  }
  return s;
}

inline std::vector<double> fd_steps(const std::vector<double>& theta,
                                    const std::vector<double>& scales,
                                    const EstimationOptions& opts) {
  std::vector<double> d(theta.size());
  for (std::size_t k = 0; k < theta.size(); ++k)
    d[k] = opts.fd_step_rel * std::max(std::fabs(theta[k]), opts.fd_step_floor / scales[k]);
  return d;
}

// Centered finite-difference estimate of D = d E[stats] / d theta with
// common random numbers: all passes of run r share the substream
// (tag, restart, r). Centered differences matter here: the expected
// statistics respond with visible curvature, and one-sided slopes at a
// workable step size are biased enough to corrupt the standard errors.
// Rate parameters clamp the lower side at zero (rates are nonnegative).
inline Eigen::MatrixXd estimate_derivative(const NetworkPanel& panel,
                                           const std::vector<EffectSpec>& effects,
                                           const std::vector<double>& theta,
                                           const std::vector<double>& scales,
                                           const EstimationOptions& opts, int runs,
                                           std::uint64_t tag, std::uint64_t restart,
                                           Eigen::MatrixXd* base_stats_out = nullptr) {
  const int p = static_cast<int>(theta.size());
  const int periods = panel.n_periods();
  const std::vector<double> steps = fd_steps(theta, scales, opts);
  Eigen::MatrixXd base(runs, p);
  std::vector<Eigen::MatrixXd> per_run(static_cast<std::size_t>(runs));

  parallel_for(runs, opts.threads, [&](int r) {
    const auto ur = static_cast<std::uint64_t>(r);
    std::vector<double> b = panel_statistics(panel, effects, theta, opts, tag, restart, ur);
    for (int s = 0; s < p; ++s) base(r, s) = b[static_cast<std::size_t>(s)];
    Eigen::MatrixXd d(p, p);
    for (int k = 0; k < p; ++k) {
      const double h = steps[static_cast<std::size_t>(k)];
      std::vector<double> up = theta, down = theta;
      up[static_cast<std::size_t>(k)] += h;
      down[static_cast<std::size_t>(k)] -= h;
      if (k < periods) down[static_cast<std::size_t>(k)] = std::max(down[static_cast<std::size_t>(k)], 0.0);
      const double denom = up[static_cast<std::size_t>(k)] - down[static_cast<std::size_t>(k)];
      const std::vector<double> zu = panel_statistics(panel, effects, up, opts, tag, restart, ur);
      const std::vector<double> zd = panel_statistics(panel, effects, down, opts, tag, restart, ur);
      for (int s = 0; s < p; ++s)
        d(s, k) = (zu[static_cast<std::size_t>(s)] - zd[static_cast<std::size_t>(s)]) / denom;
    }
    per_run[static_cast<std::size_t>(r)] = std::move(d);
  });

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(p, p);
  for (const auto& m : per_run) D += m;  // fixed order: thread count does not matter
  if (base_stats_out) *base_stats_out = base;
  return D / static_cast<double>(runs);
}

// Solver for D with an explicit singularity diagnosis: a (numerically)
// rank-deficient derivative means collinear statistics, reported by name.
inline Eigen::FullPivLU<Eigen::MatrixXd> checked_lu(const Eigen::MatrixXd& D,
                                                    const std::vector<std::string>& names) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(D);
  lu.setThreshold(1e-9);
  if (lu.rank() < D.rows()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(D, Eigen::ComputeFullV);
    const Eigen::VectorXd null_dir = svd.matrixV().col(D.cols() - 1);
    std::string offenders;
    for (Eigen::Index k = 0; k < null_dir.size(); ++k) {
      if (std::fabs(null_dir[k]) > 0.3) {
        if (!offenders.empty()) offenders += ", ";
        offenders += names[static_cast<std::size_t>(k)];
      }
    }
    throw ConfigError("unidentifiable specification: derivative matrix is singular; "
                      "collinear statistics involve {" + offenders + "}");
  }
  return lu;
}

}  // namespace detail

// Three-phase stochastic-approximation fit.
//
// Phase 1 estimates the derivative matrix at the starting point by
// forward differences with common random numbers. Phase 2 runs
// Robbins-Monro updates theta <- theta - a D^-1 (Z - target), with the
// gain halved across subphases and each subphase ending in iterate
// averaging. Phase 3 simulates at the candidate estimate to obtain the
// statistic covariance, the convergence t ratios, the overall maximum
// convergence ratio (the largest standardized deviation over any linear
// combination of statistics, sqrt(d' S^+ d)) and the parameter
// covariance D^-1 S D^-T. Non-convergence triggers a restart from the
// current estimate, up to max_restarts times.
inline MoMResult estimate(const NetworkPanel& panel, const std::vector<EffectSpec>& effects,
                          const EstimationOptions& opts) {
  if (panel.n_waves() < 2) throw std::invalid_argument("estimate: need >= 2 waves");
  const int periods = panel.n_periods();
  const int n = panel.n_actors();
  const int p_eff = static_cast<int>(effects.size());
  const int p = periods + p_eff;
  for (const auto& e : effects) e.validate();

  const std::vector<double> targets = target_statistics(panel, effects);
  const std::vector<std::string> names = parameter_names(periods, effects);

  // starting point
  std::vector<double> theta(static_cast<std::size_t>(p), 0.0);
  for (int m = 0; m < periods; ++m) {
    const double h = targets[static_cast<std::size_t>(m)];
    theta[static_cast<std::size_t>(m)] = std::max(0.5, 1.5 * h / n + 0.1);
  }
  if (opts.start_rates) {
    if (static_cast<int>(opts.start_rates->size()) != periods)
      throw ConfigError("estimate: start_rates length must equal the period count");
    for (int m = 0; m < periods; ++m) theta[static_cast<std::size_t>(m)] = (*opts.start_rates)[static_cast<std::size_t>(m)];
  }
  if (opts.start_beta) {
    if (static_cast<int>(opts.start_beta->size()) != p_eff)
      throw ConfigError("estimate: start_beta length must equal the effect count");
    for (int k = 0; k < p_eff; ++k) theta[static_cast<std::size_t>(periods + k)] = (*opts.start_beta)[static_cast<std::size_t>(k)];
  } else {
    for (int k = 0; k < p_eff; ++k) {
      if (effects[static_cast<std::size_t>(k)].kind == EffectKind::outdegree) {
        double ties = 0.0;
        for (int m = 1; m < panel.n_waves(); ++m) ties += panel.wave(m).tie_count();
        const double dens = std::clamp(
            ties / ((panel.n_waves() - 1) * static_cast<double>(n) * (n - 1)), 1e-4, 1.0 - 1e-4);
        theta[static_cast<std::size_t>(periods + k)] = std::clamp(std::log(dens / (1.0 - dens)), -3.0, 3.0);
      }
    }
  }

  const Eigen::VectorXd target_v =
      Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
  const std::vector<double> gains = phase2_gains(opts);

  // Phase 1
  const std::vector<double> scales = detail::fd_scales(panel, effects);
  Eigen::MatrixXd D = detail::estimate_derivative(panel, effects, theta, scales, opts,
                                                  opts.phase1_runs, /*tag=*/1, /*restart=*/0);
  Eigen::FullPivLU<Eigen::MatrixXd> lu = detail::checked_lu(D, names);

  MoMResult res;
  res.names = names;
  res.n_rates = periods;
  res.targets = targets;
  res.gains_used = gains;
  res.seed = opts.seed;

  auto clamp_theta = [&](std::vector<double>& th) {
    for (int m = 0; m < periods; ++m)
      th[static_cast<std::size_t>(m)] = std::max(th[static_cast<std::size_t>(m)], 0.01);
  };

  for (int attempt = 0; attempt <= opts.max_restarts; ++attempt) {
    const auto restart = static_cast<std::uint64_t>(attempt);

    // Phase 2: Robbins-Monro with subphase averaging
    for (std::size_t sub = 0; sub < gains.size(); ++sub) {
      const double gain = gains[sub];
      const int iters = static_cast<int>(std::ceil(
          opts.phase2_length_mult * (7.0 + p) * std::pow(2.52, static_cast<double>(sub))));
      const int burn = std::min(10, iters / 4);  // averaging skips the transient
      std::vector<double> accum(static_cast<std::size_t>(p), 0.0);
      for (int it = 0; it < iters; ++it) {
        const std::vector<double> z = detail::panel_statistics(
            panel, effects, theta, opts, /*s0=*/2, restart * 1000 + sub, static_cast<std::uint64_t>(it));
        Eigen::VectorXd dev(p);
        for (int s = 0; s < p; ++s) dev[s] = z[static_cast<std::size_t>(s)] - target_v[s];
        Eigen::VectorXd step = lu.solve(dev);
        for (int k = 0; k < p; ++k) {
          const double delta = std::clamp(gain * step[k], -opts.max_step, opts.max_step);
          theta[static_cast<std::size_t>(k)] -= delta;
        }
        clamp_theta(theta);
        if (it >= burn)
          for (int k = 0; k < p; ++k) accum[static_cast<std::size_t>(k)] += theta[static_cast<std::size_t>(k)];
      }
      for (int k = 0; k < p; ++k) theta[static_cast<std::size_t>(k)] = accum[static_cast<std::size_t>(k)] / (iters - burn);
      clamp_theta(theta);
    }

    // Phase 3: statistic distribution at the candidate estimate, with a
    // derivative refresh on the first phase3_deriv_runs runs.
    const int n3 = opts.phase3_runs;
    const int n3d = std::min(opts.phase3_deriv_runs, n3);
    Eigen::MatrixXd deriv_base;
    D = detail::estimate_derivative(panel, effects, theta, scales, opts, n3d, /*tag=*/3,
                                    restart, &deriv_base);
    Eigen::MatrixXd stats(n3, p);
    stats.topRows(n3d) = deriv_base;
    parallel_for(n3 - n3d, opts.threads, [&](int r) {
      const std::vector<double> z = detail::panel_statistics(
          panel, effects, theta, opts, /*s0=*/3, restart, static_cast<std::uint64_t>(n3d + r));
      for (int s = 0; s < p; ++s) stats(n3d + r, s) = z[static_cast<std::size_t>(s)];
    });
    // A rank-deficient refresh does not indicate an unidentifiable
    // specification (phase 1 already vetted that); it usually means the
    // attempt drifted into a degenerate corner. Fall back to the
    // pseudo-inverse, keep the previous direction matrix for the next
    // attempt, and treat this attempt as non-converged.
    Eigen::FullPivLU<Eigen::MatrixXd> lu3(D);
    lu3.setThreshold(1e-9);
    const bool deriv_ok = lu3.rank() == D.rows();
    if (deriv_ok) lu = lu3;

    const Eigen::VectorXd mean = stats.colwise().mean();
    const Eigen::MatrixXd centered = stats.rowwise() - mean.transpose();
    const Eigen::MatrixXd sigma = centered.transpose() * centered / static_cast<double>(n3 - 1);
    const Eigen::VectorXd dev = mean - target_v;

    res.sim_means.assign(mean.data(), mean.data() + p);
    res.sim_sds.resize(static_cast<std::size_t>(p));
    res.conv_t_ratios.resize(static_cast<std::size_t>(p));
    for (int s = 0; s < p; ++s) {
      const double sd = std::sqrt(std::max(sigma(s, s), 0.0));
      res.sim_sds[static_cast<std::size_t>(s)] = sd;
      res.conv_t_ratios[static_cast<std::size_t>(s)] = sd > 0.0 ? dev[s] / sd : 0.0;
    }
    res.max_conv_ratio = std::sqrt(std::max(
        0.0, static_cast<double>(dev.transpose() * pseudo_inverse_psd(sigma) * dev)));

    const Eigen::MatrixXd d_inv = deriv_ok ? lu3.inverse() : pseudo_inverse_svd(D);
    res.covariance = d_inv * sigma * d_inv.transpose();
    res.std_errors.resize(static_cast<std::size_t>(p));
    for (int k = 0; k < p; ++k)
      res.std_errors[static_cast<std::size_t>(k)] = std::sqrt(std::max(res.covariance(k, k), 0.0));
    res.estimates = theta;
    res.n_phase3 = n3;
    res.restarts_used = attempt;

    bool ok = deriv_ok && res.max_conv_ratio < opts.max_ratio_threshold;
    for (double t : res.conv_t_ratios) ok = ok && std::fabs(t) < opts.t_ratio_threshold;
    res.converged = ok;
    if (ok || attempt == opts.max_restarts) break;
  }

  res.rates_hat.rho.assign(res.estimates.begin(), res.estimates.begin() + periods);
  res.effects_hat = ParameterVector(
      effects, std::vector<double>(res.estimates.begin() + periods, res.estimates.end()));
  return res;
}

// ---------------------------------------------------------------------------
// Tests on a fitted result

struct TestResult {
  double statistic = 0.0;
  int df = 1;
  std::string side = "two";
  double p_value = 1.0;
};

inline TestResult t_test(const MoMResult& result, int index) {
  if (index < 0 || index >= static_cast<int>(result.estimates.size()))
    throw std::out_of_range("t_test: parameter index out of range");
  const double se = result.std_errors[static_cast<std::size_t>(index)];
  if (se <= 0.0) throw std::domain_error("t_test: zero standard error; test undefined");
  const double z = result.estimates[static_cast<std::size_t>(index)] / se;
  return {z, 1, "two", two_sided_normal_p(z)};
}

inline TestResult wald_test(const MoMResult& result, const std::vector<int>& indices) {
  if (indices.empty()) throw std::invalid_argument("wald_test: empty index set");
  const int q = static_cast<int>(indices.size());
  Eigen::VectorXd sub(q);
  Eigen::MatrixXd cov(q, q);
  for (int a = 0; a < q; ++a) {
    const int ia = indices[static_cast<std::size_t>(a)];
    if (ia < 0 || ia >= static_cast<int>(result.estimates.size()))
      throw std::out_of_range("wald_test: parameter index out of range");
    sub[a] = result.estimates[static_cast<std::size_t>(ia)];
    for (int b = 0; b < q; ++b) cov(a, b) = result.covariance(ia, indices[static_cast<std::size_t>(b)]);
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) {
    std::string which;
    for (int ia : indices) {
      if (!which.empty()) which += ", ";
      which += result.names[static_cast<std::size_t>(ia)];
    }
    throw std::domain_error("wald_test: singular covariance submatrix for {" + which + "}");
  }
  const double w = sub.transpose() * lu.solve(sub);
  return {w, q, "chi2", chi_squared_sf(w, q)};
}

inline TestResult linear_combination_test(const MoMResult& result, const std::vector<double>& c,
                                          const std::string& side = "right") {
  if (c.size() != result.estimates.size())
    throw std::invalid_argument("linear_combination_test: coefficient length mismatch");
  const Eigen::Map<const Eigen::VectorXd> cv(c.data(), static_cast<Eigen::Index>(c.size()));
  const Eigen::Map<const Eigen::VectorXd> est(result.estimates.data(),
                                              static_cast<Eigen::Index>(result.estimates.size()));
  const double var = cv.transpose() * result.covariance * cv;
  if (var <= 0.0)
    throw std::domain_error("linear_combination_test: degenerate variance c'Sc <= 0");
  const double z = cv.dot(est) / std::sqrt(var);
  TestResult t{z, 1, side, 1.0};
  if (side == "right")
    t.p_value = normal_sf(z);
  else if (side == "left")
    t.p_value = normal_cdf(z);
  else if (side == "two")
    t.p_value = two_sided_normal_p(z);
  else
    throw std::invalid_argument("linear_combination_test: side must be right/left/two");
  return t;
}

}  // namespace saom

#endif
