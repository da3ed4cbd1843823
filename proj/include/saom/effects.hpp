#ifndef SAOM_EFFECTS_HPP
#define SAOM_EFFECTS_HPP

#include <cmath>
#include <string>
#include <vector>

#include "saom/errors.hpp"
#include "saom/network.hpp"

namespace saom {

enum class EffectKind {
  outdegree,
  reciprocity,
  gwesp,
  reciprocity_gwesp,
  indegree_popularity,
  outdegree_popularity,
  outdegree_activity,
  cov_ego,          // egoX
  cov_alter,        // altX
  cov_alter_sq,     // altSqX
  cov_ego_sq,       // egoSqX
  cov_diff_sq,      // diffSqX
  cov_ego_x_alter,  // egoXaltX
  cov_same,         // sameX
};

inline bool is_covariate_kind(EffectKind k) {
  switch (k) {
    case EffectKind::cov_ego:
    case EffectKind::cov_alter:
    case EffectKind::cov_alter_sq:
    case EffectKind::cov_ego_sq:
    case EffectKind::cov_diff_sq:
    case EffectKind::cov_ego_x_alter:
    case EffectKind::cov_same:
      return true;
    default:
      return false;
  }
}

inline bool is_gwesp_kind(EffectKind k) {
  return k == EffectKind::gwesp || k == EffectKind::reciprocity_gwesp;
}

constexpr double kDefaultGwespAlpha = 0.6931471805599453;  // log 2

struct EffectSpec {
  EffectKind kind;
  std::string covariate;  // empty for structural effects
  double alpha = kDefaultGwespAlpha;

  static EffectSpec structural(EffectKind k, double alpha = kDefaultGwespAlpha) {
    EffectSpec s{k, "", alpha};
    s.validate();
    return s;
  }

  static EffectSpec with_covariate(EffectKind k, std::string name) {
    EffectSpec s{k, std::move(name)};
    s.validate();
    return s;
  }

  void validate() const {
    if (is_covariate_kind(kind) && covariate.empty())
      throw ConfigError("effect '" + base_name() + "' requires a covariate");
    if (!is_covariate_kind(kind) && !covariate.empty())
      throw ConfigError("structural effect '" + base_name() + "' does not take a covariate");
    if (is_gwesp_kind(kind) && !(alpha > 0.0))
      throw ConfigError("gwesp alpha must be positive");
  }

  std::string base_name() const {
    switch (kind) {
      case EffectKind::outdegree: return "outdegree";
      case EffectKind::reciprocity: return "reciprocity";
      case EffectKind::gwesp: return "gwesp";
      case EffectKind::reciprocity_gwesp: return "recipGwesp";
      case EffectKind::indegree_popularity: return "inPop";
      case EffectKind::outdegree_popularity: return "outPop";
      case EffectKind::outdegree_activity: return "outAct";
      case EffectKind::cov_ego: return "egoX";
      case EffectKind::cov_alter: return "altX";
      case EffectKind::cov_alter_sq: return "altSqX";
      case EffectKind::cov_ego_sq: return "egoSqX";
      case EffectKind::cov_diff_sq: return "diffSqX";
      case EffectKind::cov_ego_x_alter: return "egoXaltX";
      case EffectKind::cov_same: return "sameX";
    }
    return "?";
  }

  std::string name() const {
    if (covariate.empty()) return base_name();
    return base_name() + "(" + covariate + ")";
  }

  bool operator==(const EffectSpec& o) const {
    return kind == o.kind && covariate == o.covariate &&
           (!is_gwesp_kind(kind) || alpha == o.alpha);
  }
};

// Ordered effect list with one weight per effect; the order is the
// canonical statistic order used by estimation.
struct ParameterVector {
  std::vector<EffectSpec> effects;
  std::vector<double> beta;

  ParameterVector() = default;
  ParameterVector(std::vector<EffectSpec> e, std::vector<double> b)
      : effects(std::move(e)), beta(std::move(b)) {
    if (effects.size() != beta.size())
      throw ConfigError("ParameterVector: effect and weight counts differ");
  }

  std::size_t size() const { return effects.size(); }
};

namespace detail {

inline const ActorCovariate& covariate_for(const EffectSpec& spec, const CovariateSet& covs) {
  auto it = covs.find(spec.covariate);
  if (it == covs.end())
    throw ConfigError("effect '" + spec.name() + "': unknown covariate '" + spec.covariate + "'");
  return it->second;
}

inline double gwesp_weight(double alpha, int sp) {
  // e^a (1 - (1 - e^{-a})^sp)
  const double ea = std::exp(alpha);
  return ea * (1.0 - std::pow(1.0 - 1.0 / ea, sp));
}

// Dyadic contribution of a covariate effect to the tie i -> j.
inline double dyadic_value(EffectKind kind, double v_i, double v_j) {
  switch (kind) {
    case EffectKind::cov_ego: return v_i;
    case EffectKind::cov_alter: return v_j;
    case EffectKind::cov_alter_sq: return v_j * v_j;
    case EffectKind::cov_ego_sq: return v_i * v_i;
    case EffectKind::cov_diff_sq: return (v_i - v_j) * (v_i - v_j);
    case EffectKind::cov_ego_x_alter: return v_i * v_j;
    case EffectKind::cov_same: return v_i == v_j ? 1.0 : 0.0;
    default: return 0.0;
  }
}

}  // namespace detail

// Effect statistic s_ki(x, v) for actor i.
inline double statistic(const EffectSpec& spec, const DirectedNetwork& net,
                        const CovariateSet& covs, int i) {
  const int n = net.size();
  const std::uint8_t* row = net.row(i);
  switch (spec.kind) {
    case EffectKind::outdegree:
      return net.outdegree(i);
    case EffectKind::reciprocity: {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        if (row[j] && net.tie(j, i)) s += 1.0;
      return s;
    }
    case EffectKind::gwesp: {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        if (row[j]) s += detail::gwesp_weight(spec.alpha, net.shared_partners(i, j));
      return s;
    }
    case EffectKind::reciprocity_gwesp: {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        if (row[j] && net.tie(j, i)) s += detail::gwesp_weight(spec.alpha, net.shared_partners(i, j));
      return s;
    }
    case EffectKind::indegree_popularity: {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        if (row[j]) s += net.indegree(j);
      return s;
    }
    case EffectKind::outdegree_popularity: {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        if (row[j]) s += net.outdegree(j);
      return s;
    }
    case EffectKind::outdegree_activity: {
      const double d = net.outdegree(i);
      return d * d;
    }
    default: {
      const ActorCovariate& cov = detail::covariate_for(spec, covs);
      const double v_i = cov.value(i);
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        if (row[j]) s += detail::dyadic_value(spec.kind, v_i, cov.value(j));
      return s;
    }
  }
}

// f_i(x, v, beta) = sum_k beta_k s_ki(x, v)
inline double evaluation_function(const ParameterVector& params, const DirectedNetwork& net,
                                  const CovariateSet& covs, int i) {
  double f = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k)
    f += params.beta[k] * statistic(params.effects[k], net, covs, i);
  return f;
}

// Wave-level total sum_i s_ki(x, v); the estimation target building block.
inline double statistic_total(const EffectSpec& spec, const DirectedNetwork& net,
                              const CovariateSet& covs) {
  double s = 0.0;
  for (int i = 0; i < net.size(); ++i) s += statistic(spec, net, covs, i);
  return s;
}

// Change scores f_i(x^{+-ij}) - f_i(x) for every target j; entry i is 0.
// Everything is O(1) per target except the gwesp kinds, which touch the
// shared-partner row.
inline std::vector<double> change_scores(const ParameterVector& params,
                                         const DirectedNetwork& net, const CovariateSet& covs,
                                         int i) {
  const int n = net.size();
  std::vector<double> delta(static_cast<std::size_t>(n), 0.0);
  if (params.size() == 0) return delta;
  const std::uint8_t* row = net.row(i);

  // shared-partner row and gwesp weight cache, filled lazily
  std::vector<int> sp_row;
  std::vector<double> w_cache;
  double cached_alpha = -1.0;
  auto ensure_sp = [&]() {
    if (!sp_row.empty()) return;
    sp_row.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) sp_row[j] = j == i ? 0 : net.shared_partners(i, j);
  };
  auto weight = [&](double alpha, int sp) {
    if (alpha != cached_alpha) {
      cached_alpha = alpha;
      w_cache.assign(static_cast<std::size_t>(n) + 1, -1.0);
    }
    if (sp < 0) return 0.0;
    double& w = w_cache[static_cast<std::size_t>(sp)];
    if (w < 0.0) w = detail::gwesp_weight(alpha, sp);
    return w;
  };

  for (std::size_t k = 0; k < params.size(); ++k) {
    const EffectSpec& spec = params.effects[k];
    const double beta = params.beta[k];
    if (beta == 0.0) continue;
    switch (spec.kind) {
      case EffectKind::outdegree:
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          delta[j] += beta * (row[j] ? -1.0 : 1.0);
        }
        break;
      case EffectKind::reciprocity:
        for (int j = 0; j < n; ++j) {
          if (j == i || !net.tie(j, i)) continue;
          delta[j] += beta * (row[j] ? -1.0 : 1.0);
        }
        break;
      case EffectKind::gwesp:
      case EffectKind::reciprocity_gwesp: {
        ensure_sp();
        const bool recip = spec.kind == EffectKind::reciprocity_gwesp;
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          const int d = row[j] ? -1 : 1;
          double change = 0.0;
          // direct term for the toggled tie itself
          if (!recip || net.tie(j, i)) change += d * weight(spec.alpha, sp_row[j]);
          // sp_ih changes by d for every h with x_ih = 1 and x_jh = 1
          const std::uint8_t* row_j = net.row(j);
          for (int h = 0; h < n; ++h) {
            if (h == i || h == j || !row[h] || !row_j[h]) continue;
            if (recip && !net.tie(h, i)) continue;
            change += weight(spec.alpha, sp_row[h] + d) - weight(spec.alpha, sp_row[h]);
          }
          delta[j] += beta * change;
        }
        break;
      }
      case EffectKind::indegree_popularity:
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          // the toggled tie is itself part of x_{+j}
          delta[j] += beta * (row[j] ? -static_cast<double>(net.indegree(j))
                                     : static_cast<double>(net.indegree(j)) + 1.0);
        }
        break;
      case EffectKind::outdegree_popularity:
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          delta[j] += beta * (row[j] ? -1.0 : 1.0) * net.outdegree(j);
        }
        break;
      case EffectKind::outdegree_activity: {
        const double od = net.outdegree(i);
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          // (od + d)^2 - od^2
          delta[j] += beta * (row[j] ? -2.0 * od + 1.0 : 2.0 * od + 1.0);
        }
        break;
      }
      default: {
        const ActorCovariate& cov = detail::covariate_for(spec, covs);
        const double v_i = cov.value(i);
        for (int j = 0; j < n; ++j) {
          if (j == i) continue;
          delta[j] += beta * (row[j] ? -1.0 : 1.0) * detail::dyadic_value(spec.kind, v_i, cov.value(j));
        }
        break;
      }
    }
  }
  return delta;
}

}  // namespace saom

#endif
