#ifndef SAOM_GOF_HPP
#define SAOM_GOF_HPP

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "saom/effects.hpp"
#include "saom/estimate.hpp"
#include "saom/linalg.hpp"
#include "saom/network.hpp"
#include "saom/parallel.hpp"
#include "saom/simulate.hpp"

namespace saom {

enum class GofFamily {
  indegree_distribution,
  outdegree_distribution,
  geodesic_distribution,
  triad_census,
};

inline std::string to_string(GofFamily f) {
  switch (f) {
    case GofFamily::indegree_distribution: return "indegree_distribution";
    case GofFamily::outdegree_distribution: return "outdegree_distribution";
    case GofFamily::geodesic_distribution: return "geodesic_distribution";
    case GofFamily::triad_census: return "triad_census";
  }
  return "?";
}

constexpr int kDegreeSupportMax = 8;   // cumulative counts for degree <= 0..8
constexpr int kGeodesicSupportMax = 5; // distances 1..5, then an overflow bucket

// Census order follows the standard 16-class directed triad typology.
inline const std::array<std::string, 16>& triad_class_names() {
  static const std::array<std::string, 16> names = {
      "003", "012", "102", "021D", "021U", "021C", "111D", "111U",
      "030T", "030C", "201", "120D", "120U", "120C", "210", "300"};
  return names;
}

namespace detail {

// Classifies the triad on actors (a, b, c) by dyad composition: count
// mutual/asymmetric/null dyads, then disambiguate by arc orientation.
// "D" variants have the asymmetric arcs leaving a common source, "U"
// variants entering a common target, "C" variants forming a chain.
inline int triad_class(const DirectedNetwork& x, int a, int b, int c) {
  const std::array<int, 3> v{a, b, c};
  int mutual = 0, asym = 0;
  std::array<std::pair<int, int>, 3> arcs{};  // source/target of asymmetric dyads
  int mutual_pair_a = -1, mutual_pair_b = -1;
  for (int d = 0; d < 3; ++d) {
    const int i = v[static_cast<std::size_t>(d)];
    const int j = v[static_cast<std::size_t>((d + 1) % 3)];
    const bool ij = x.tie(i, j), ji = x.tie(j, i);
    if (ij && ji) {
      mutual_pair_a = i;
      mutual_pair_b = j;
      ++mutual;
    } else if (ij || ji) {
      arcs[static_cast<std::size_t>(asym)] = ij ? std::make_pair(i, j) : std::make_pair(j, i);
      ++asym;
    }
  }

  if (mutual == 0 && asym == 0) return 0;                    // 003
  if (mutual == 0 && asym == 1) return 1;                    // 012
  if (mutual == 1 && asym == 0) return 2;                    // 102
  if (mutual == 0 && asym == 2) {
    if (arcs[0].first == arcs[1].first) return 3;            // 021D
    if (arcs[0].second == arcs[1].second) return 4;          // 021U
    return 5;                                                // 021C
  }
  if (mutual == 1 && asym == 1) {
    // third node sends into the mutual pair -> D, receives from it -> U
    const int t = arcs[0].second;
    const bool arc_into_pair = (t == mutual_pair_a || t == mutual_pair_b);
    return arc_into_pair ? 6 : 7;                            // 111D : 111U
  }
  if (mutual == 0 && asym == 3) {
    // cyclic iff every node has exactly one outgoing arc among the three
    std::array<int, 3> outdeg{0, 0, 0};
    for (const auto& arc : arcs)
      for (int d = 0; d < 3; ++d)
        if (v[static_cast<std::size_t>(d)] == arc.first) ++outdeg[static_cast<std::size_t>(d)];
    const bool cyclic = outdeg[0] == 1 && outdeg[1] == 1 && outdeg[2] == 1;
    return cyclic ? 9 : 8;                                   // 030C : 030T
  }
  if (mutual == 2 && asym == 0) return 10;                   // 201
  if (mutual == 1 && asym == 2) {
    if (arcs[0].first == arcs[1].first) return 11;           // 120D
    if (arcs[0].second == arcs[1].second) return 12;         // 120U
    return 13;                                               // 120C
  }
  if (mutual == 2 && asym == 1) return 14;                   // 210
  return 15;                                                 // 300
}

inline std::vector<double> degree_cumulative(const std::vector<int>& deg) {
  std::vector<double> out(kDegreeSupportMax + 1, 0.0);
  for (int d : deg)
    for (int k = d; k <= kDegreeSupportMax; ++k) out[static_cast<std::size_t>(k)] += 1.0;
  return out;
}

inline std::vector<double> geodesic_counts(const DirectedNetwork& x) {
  const int n = x.size();
  std::vector<double> out(kGeodesicSupportMax + 1, 0.0);
  std::vector<int> dist(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    dist[static_cast<std::size_t>(s)] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      const std::uint8_t* row = x.row(u);
      for (int w = 0; w < n; ++w) {
        if (row[w] && dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(u)] + 1;
          queue.push_back(w);
        }
      }
    }
    for (int t = 0; t < n; ++t) {
      if (t == s) continue;
      const int d = dist[static_cast<std::size_t>(t)];
      if (d >= 1 && d <= kGeodesicSupportMax)
        out[static_cast<std::size_t>(d - 1)] += 1.0;
      else
        out[static_cast<std::size_t>(kGeodesicSupportMax)] += 1.0;  // beyond support or unreachable
    }
  }
  return out;
}

}  // namespace detail

// Auxiliary statistic vector of a single network.
//  - degree families: cumulative actor counts with degree <= k, k = 0..8
//  - geodesic family: ordered pairs at directed distance 1..5 plus an
//    overflow/unreachable bucket
//  - triad census: the 16-class directed census
inline std::vector<double> auxiliary_statistics(const DirectedNetwork& net, GofFamily family) {
  switch (family) {
    case GofFamily::indegree_distribution:
      return detail::degree_cumulative(degrees(net).in);
    case GofFamily::outdegree_distribution:
      return detail::degree_cumulative(degrees(net).out);
    case GofFamily::geodesic_distribution:
      return detail::geodesic_counts(net);
    case GofFamily::triad_census: {
      std::vector<double> census(16, 0.0);
      const int n = net.size();
      for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
          for (int c = b + 1; c < n; ++c)
            census[static_cast<std::size_t>(detail::triad_class(net, a, b, c))] += 1.0;
      return census;
    }
  }
  return {};
}

// Count of transitive ordered triples (i->j, j->k, i->k distinct);
// reported alongside the census.
inline long transitive_triple_count(const DirectedNetwork& net) {
  const int n = net.size();
  long count = 0;
  for (int i = 0; i < n; ++i) {
    const std::uint8_t* row_i = net.row(i);
    for (int j = 0; j < n; ++j) {
      if (j == i || !row_i[j]) continue;
      const std::uint8_t* row_j = net.row(j);
      for (int k = 0; k < n; ++k)
        if (k != i && k != j && row_j[k] && row_i[k]) ++count;
    }
  }
  return count;
}

struct GofReport {
  GofFamily family = GofFamily::indegree_distribution;
  std::vector<double> observed;
  std::vector<std::vector<double>> simulated;   // runs x statistics
  std::vector<int> dropped_dims;                // zero-variance coordinates
  double mahalanobis_observed = 0.0;
  double p_value = 1.0;
  std::vector<double> simulated_distances;
};

namespace detail {

// Mahalanobis distances of the observed vector and each simulated run,
// using the simulated mean and the pseudo-inverse of the simulated
// covariance. Zero-variance coordinates are dropped first.
inline void mahalanobis_gof(GofReport& rep) {
  const int runs = static_cast<int>(rep.simulated.size());
  const int dim = static_cast<int>(rep.observed.size());

  std::vector<int> keep;
  for (int d = 0; d < dim; ++d) {
    double lo = rep.simulated[0][static_cast<std::size_t>(d)], hi = lo;
    for (int r = 1; r < runs; ++r) {
      const double v = rep.simulated[static_cast<std::size_t>(r)][static_cast<std::size_t>(d)];
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi > lo)
      keep.push_back(d);
    else
      rep.dropped_dims.push_back(d);
  }
  const int q = static_cast<int>(keep.size());
  if (q == 0) {
    rep.mahalanobis_observed = 0.0;
    rep.simulated_distances.assign(static_cast<std::size_t>(runs), 0.0);
    rep.p_value = 1.0;
    return;
  }

  Eigen::MatrixXd sims(runs, q);
  Eigen::VectorXd obs(q);
  for (int c = 0; c < q; ++c) {
    obs[c] = rep.observed[static_cast<std::size_t>(keep[static_cast<std::size_t>(c)])];
    for (int r = 0; r < runs; ++r)
      sims(r, c) = rep.simulated[static_cast<std::size_t>(r)][static_cast<std::size_t>(keep[static_cast<std::size_t>(c)])];
  }
  const Eigen::VectorXd mean = sims.colwise().mean();
  const Eigen::MatrixXd centered = sims.rowwise() - mean.transpose();
  const Eigen::MatrixXd sigma = centered.transpose() * centered / static_cast<double>(runs - 1);
  const Eigen::MatrixXd prec = pseudo_inverse_psd(sigma);

  auto dist = [&](const Eigen::VectorXd& v) {
    const Eigen::VectorXd d = v - mean;
    return std::sqrt(std::max(0.0, static_cast<double>(d.transpose() * prec * d)));
  };
  rep.mahalanobis_observed = dist(obs);
  rep.simulated_distances.resize(static_cast<std::size_t>(runs));
  int at_least = 0;
  for (int r = 0; r < runs; ++r) {
    const double dr = dist(sims.row(r).transpose());
    rep.simulated_distances[static_cast<std::size_t>(r)] = dr;
    if (dr >= rep.mahalanobis_observed) ++at_least;
  }
  // observed vector included in the reference set
  rep.p_value = static_cast<double>(at_least + 1) / static_cast<double>(runs + 1);
}

}  // namespace detail

// Simulation-based goodness of fit: n_sim end waves are simulated per
// period from the fitted model, conditioning on the preceding observed
// wave; auxiliary statistics are summed across periods and the observed
// vector is placed in the simulated Mahalanobis distribution.
inline GofReport gof(const NetworkPanel& panel, const ParameterVector& effects,
                     const RateParameters& rates, GofFamily family, int n_sim,
                     std::uint64_t seed, int threads = 1) {
  if (n_sim < 20) throw std::invalid_argument("gof: need at least 20 simulations");
  if (panel.n_waves() < 2) throw std::invalid_argument("gof: need >= 2 waves");
  if (static_cast<int>(rates.rho.size()) != panel.n_periods())
    throw std::invalid_argument("gof: need one rate per period");

  GofReport rep;
  rep.family = family;

  rep.observed = auxiliary_statistics(panel.wave(1), family);
  for (int m = 2; m < panel.n_waves(); ++m) {
    const std::vector<double> a = auxiliary_statistics(panel.wave(m), family);
    for (std::size_t d = 0; d < a.size(); ++d) rep.observed[d] += a[d];
  }

  rep.simulated.assign(static_cast<std::size_t>(n_sim), {});
  parallel_for(n_sim, threads, [&](int r) {
    std::vector<double> total;
    for (int m = 0; m < panel.n_periods(); ++m) {
      RandomEngine rng = RandomEngine::substream(
          seed, {0x90fu, static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(m)});
      SimOptions opts;
      SimResult sim = simulate_period(panel.wave(m), effects,
                                      rates.rho[static_cast<std::size_t>(m)], panel.covariates(),
                                      opts, rng);
      const std::vector<double> a = auxiliary_statistics(sim.end, family);
      if (total.empty())
        total = a;
      else
        for (std::size_t d = 0; d < a.size(); ++d) total[d] += a[d];
    }
    rep.simulated[static_cast<std::size_t>(r)] = std::move(total);
  });

  detail::mahalanobis_gof(rep);
  return rep;
}

inline GofReport gof(const NetworkPanel& panel, const MoMResult& fitted, GofFamily family,
                     int n_sim, std::uint64_t seed, int threads = 1) {
  return gof(panel, fitted.effects_hat, fitted.rates_hat, family, n_sim, seed, threads);
}

}  // namespace saom

#endif
