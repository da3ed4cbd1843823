#ifndef SAOM_SIMULATE_HPP
#define SAOM_SIMULATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "saom/effects.hpp"
#include "saom/network.hpp"
#include "saom/random.hpp"

namespace saom {

// Per-period opportunity rates; rates[m] is the rate for the period
// between waves m and m+1. Zero is allowed (a frozen period).
struct RateParameters {
  std::vector<double> rho;

  void validate() const {
    for (double r : rho)
      if (!(r >= 0.0) || !std::isfinite(r))
        throw std::invalid_argument("RateParameters: rates must be finite and >= 0");
  }
};

struct SimOptions {
  std::uint64_t seed = 1;
  double period_length = 1.0;
  long max_events = 1000000;
  // Test/diagnostic hook, called once per opportunity with (actor,
  // chosen target); target == actor means "keep the network as it is".
  std::function<void(int, int)> on_event;
};

// Multinomial-logit draw over exp(scores), stabilized by subtracting the
// maximum; the outcome is exactly invariant to adding a constant to all
// scores. Returns the chosen index.
inline int logit_choice(std::span<const double> scores, RandomEngine& rng) {
  double m = scores[0];
  for (double s : scores) m = std::max(m, s);
  double total = 0.0;
  for (double s : scores) total += std::exp(s - m);
  const double u = rng.uniform01() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < scores.size(); ++k) {
    acc += std::exp(scores[k] - m);
    if (u < acc) return static_cast<int>(k);
  }
  return static_cast<int>(scores.size()) - 1;
}

struct SimResult {
  DirectedNetwork end;
  long event_count = 0;
  bool truncated = false;  // max_events hit before the period elapsed
};

// Simulates one observation period of the actor-oriented model: actors
// receive change opportunities at total rate n * rho; the opportunity
// actor is uniform; the actor toggles at most one outgoing tie, chosen
// by a logit over the change scores with "no change" as the zero-score
// alternative.
inline SimResult simulate_period(const DirectedNetwork& start, const ParameterVector& params,
                                 double rho, const CovariateSet& covs, const SimOptions& opts,
                                 RandomEngine& rng) {
  if (!(rho >= 0.0)) throw std::invalid_argument("simulate_period: rate must be >= 0");
  if (opts.max_events < 1) throw std::invalid_argument("simulate_period: max_events must be >= 1");
  SimResult res{start, 0, false};
  const int n = start.size();
  const double total_rate = static_cast<double>(n) * rho;
  if (total_rate <= 0.0 || opts.period_length <= 0.0) return res;

  double clock = 0.0;
  while (true) {
    clock += rng.exponential(total_rate);
    if (clock >= opts.period_length) break;
    if (res.event_count >= opts.max_events) {
      res.truncated = true;
      break;
    }
    const int actor = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(n)));
    std::vector<double> delta = change_scores(params, res.end, covs, actor);
    const int choice = logit_choice(delta, rng);
    if (choice != actor) res.end.flip(actor, choice);
    ++res.event_count;
    if (opts.on_event) opts.on_event(actor, choice);
  }
  return res;
}

inline SimResult simulate_period(const DirectedNetwork& start, const ParameterVector& params,
                                 double rho, const CovariateSet& covs, const SimOptions& opts) {
  RandomEngine rng(opts.seed);
  return simulate_period(start, params, rho, covs, opts, rng);
}

struct PanelSimResult {
  NetworkPanel panel;
  std::vector<long> event_counts;
  bool truncated = false;
};

// Chains simulate_period across observation gaps; wave m+1 is simulated
// from wave m. Period m uses RNG substream (seed, m) so that periods are
// independent and the whole panel is reproducible bit-for-bit.
inline PanelSimResult simulate_panel(const DirectedNetwork& start, const ParameterVector& params,
                                     const RateParameters& rates, const CovariateSet& covs,
                                     int n_periods, const SimOptions& opts,
                                     std::vector<std::string> actor_labels = {}) {
  if (n_periods < 0) throw std::invalid_argument("simulate_panel: negative period count");
  if (static_cast<int>(rates.rho.size()) < n_periods)
    throw std::invalid_argument("simulate_panel: need one rate per period");
  rates.validate();

  std::vector<DirectedNetwork> waves;
  waves.reserve(static_cast<std::size_t>(n_periods) + 1);
  waves.push_back(start);
  std::vector<long> counts;
  bool truncated = false;
  for (int m = 0; m < n_periods; ++m) {
    RandomEngine rng = RandomEngine::substream(opts.seed, {0x5eedu, static_cast<std::uint64_t>(m)});
    SimResult r = simulate_period(waves.back(), params, rates.rho[static_cast<std::size_t>(m)],
                                  covs, opts, rng);
    waves.push_back(r.end);
    counts.push_back(r.event_count);
    truncated = truncated || r.truncated;
  }
  return {NetworkPanel(std::move(waves), covs, std::move(actor_labels)), std::move(counts),
          truncated};
}

}  // namespace saom

#endif
