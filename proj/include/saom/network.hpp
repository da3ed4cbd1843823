#ifndef SAOM_NETWORK_HPP
#define SAOM_NETWORK_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "saom/errors.hpp"

namespace saom {

// Directed binary network on n actors, dense row-major storage, no
// self-ties. Degree counts are maintained incrementally so the simulator
// can read them in O(1); they always equal a from-scratch recount.
class DirectedNetwork {
 public:
  explicit DirectedNetwork(int n)
      : n_(n), ties_(static_cast<std::size_t>(n) * n, 0), outdeg_(n, 0), indeg_(n, 0) {
    if (n < 2) throw std::invalid_argument("DirectedNetwork: need at least 2 actors");
  }

  int size() const { return n_; }

  bool tie(int i, int j) const { return ties_[idx(i, j)] != 0; }

  void set_tie(int i, int j, bool present) {
    check_pair(i, j);
    if (i == j) {
      if (present) throw std::invalid_argument("DirectedNetwork: self-ties are not allowed");
      return;
    }
    const std::uint8_t v = present ? 1 : 0;
    std::uint8_t& cell = ties_[idx(i, j)];
    if (cell == v) return;
    const int d = present ? 1 : -1;
    cell = v;
    outdeg_[i] += d;
    indeg_[j] += d;
  }

  // In-place toggle of entry (i, j); i == j is a no-op by convention.
  void flip(int i, int j) {
    check_pair(i, j);
    if (i == j) return;
    std::uint8_t& cell = ties_[idx(i, j)];
    const int d = cell ? -1 : 1;
    cell ^= 1;
    outdeg_[i] += d;
    indeg_[j] += d;
  }

  int outdegree(int i) const { return outdeg_[check_actor(i)]; }
  int indegree(int j) const { return indeg_[check_actor(j)]; }

  int tie_count() const {
    int t = 0;
    for (int d : outdeg_) t += d;
    return t;
  }

  // Number of shared partners sp_ij = sum_h x_ih x_hj; zero on the diagonal.
  int shared_partners(int i, int j) const {
    check_pair(i, j);
    if (i == j) return 0;
    const std::uint8_t* row_i = &ties_[idx(i, 0)];
    int sp = 0;
    for (int h = 0; h < n_; ++h) sp += row_i[h] & ties_[idx(h, j)];
    return sp;
  }

  const std::uint8_t* row(int i) const { return &ties_[idx(i, 0)]; }

  bool operator==(const DirectedNetwork& o) const { return n_ == o.n_ && ties_ == o.ties_; }
  bool operator!=(const DirectedNetwork& o) const { return !(*this == o); }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }
  int check_actor(int i) const {
    if (i < 0 || i >= n_) throw std::out_of_range("DirectedNetwork: actor index out of range");
    return i;
  }
  void check_pair(int i, int j) const {
    check_actor(i);
    check_actor(j);
  }

  int n_;
  std::vector<std::uint8_t> ties_;
  std::vector<int> outdeg_, indeg_;
};

// Value-returning toggle: x^{+-ij}, with x^{+-ii} = x.
inline DirectedNetwork toggle(const DirectedNetwork& net, int i, int j) {
  DirectedNetwork out = net;
  out.flip(i, j);
  return out;
}

struct Degrees {
  std::vector<int> out;
  std::vector<int> in;
};

inline Degrees degrees(const DirectedNetwork& net) {
  const int n = net.size();
  Degrees d{std::vector<int>(n), std::vector<int>(n)};
  for (int i = 0; i < n; ++i) {
    d.out[i] = net.outdegree(i);
    d.in[i] = net.indegree(i);
  }
  return d;
}

inline int shared_partners(const DirectedNetwork& net, int i, int j) {
  return net.shared_partners(i, j);
}

inline int hamming_distance(const DirectedNetwork& a, const DirectedNetwork& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("hamming_distance: size mismatch");
  int d = 0;
  const int n = a.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (a.tie(i, j) != b.tie(i, j)) ++d;
  return d;
}

// Range summary of a covariate on the analysis scale.
struct CovariateRange {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

// Numeric actor covariate. Values live on the analysis scale: if the
// covariate was centered at ingestion, `offset` holds the subtracted
// constant and `mean()` is 0 (within fp noise, stored exactly as 0).
class ActorCovariate {
 public:
  // `declared_range` refers to the incoming (raw) scale; it is shifted
  // along with the values when centering is requested. A constant
  // covariate is rejected.
  static ActorCovariate from_values(std::vector<double> values, bool center,
                                    std::optional<std::pair<double, double>> declared_range = {}) {
    if (values.size() < 2) throw std::invalid_argument("ActorCovariate: need at least 2 actors");
    double lo = values[0], hi = values[0], sum = 0.0;
    for (double v : values) {
      if (!std::isfinite(v)) throw std::invalid_argument("ActorCovariate: non-finite value");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    double raw_mean = sum / static_cast<double>(values.size());
    double rmin = lo, rmax = hi;
    if (declared_range) {
      rmin = declared_range->first;
      rmax = declared_range->second;
      if (rmin > lo || rmax < hi)
        throw IngestError("covariate range [" + std::to_string(rmin) + ", " +
                          std::to_string(rmax) + "] does not contain the data range [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    if (!(rmin < rmax))
      throw std::invalid_argument("ActorCovariate: constant covariate (range_min == range_max)");

    ActorCovariate c;
    c.centered_ = center;
    if (center) {
      for (double& v : values) v -= raw_mean;
      c.offset_ = raw_mean;
      c.mean_ = 0.0;
      rmin -= raw_mean;
      rmax -= raw_mean;
    } else {
      c.offset_ = 0.0;
      c.mean_ = raw_mean;
    }
    c.values_ = std::move(values);
    c.range_min_ = rmin;
    c.range_max_ = rmax;
    return c;
  }

  double value(int i) const { return values_.at(static_cast<std::size_t>(i)); }
  const std::vector<double>& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  bool centered() const { return centered_; }
  double mean() const { return mean_; }
  double offset() const { return offset_; }
  double range_min() const { return range_min_; }
  double range_max() const { return range_max_; }
  CovariateRange range() const { return {range_min_, range_max_, mean_}; }

 private:
  std::vector<double> values_;
  bool centered_ = false;
  double mean_ = 0.0;
  double offset_ = 0.0;  // constant subtracted at centering (raw-scale mean)
  double range_min_ = 0.0;
  double range_max_ = 0.0;
};

using CovariateSet = std::map<std::string, ActorCovariate>;

// Ordered waves of a directed network plus named actor covariates.
// Observed data always has >= 2 waves (enforced at ingestion); a panel
// produced by a 0-period simulation may consist of the start wave only.
class NetworkPanel {
 public:
  NetworkPanel(std::vector<DirectedNetwork> waves, CovariateSet covariates,
               std::vector<std::string> actor_labels = {})
      : waves_(std::move(waves)), covariates_(std::move(covariates)),
        labels_(std::move(actor_labels)) {
    if (waves_.empty()) throw std::invalid_argument("NetworkPanel: no waves");
    const int n = waves_.front().size();
    for (const auto& w : waves_)
      if (w.size() != n) throw std::invalid_argument("NetworkPanel: waves differ in actor count");
    for (const auto& [name, cov] : covariates_)
      if (cov.size() != n)
        throw std::invalid_argument("NetworkPanel: covariate '" + name + "' has wrong length");
    if (labels_.empty()) {
      labels_.reserve(n);
      for (int i = 0; i < n; ++i) labels_.push_back(std::to_string(i + 1));
    } else if (static_cast<int>(labels_.size()) != n) {
      throw std::invalid_argument("NetworkPanel: actor label count mismatch");
    }
  }

  int n_actors() const { return waves_.front().size(); }
  int n_waves() const { return static_cast<int>(waves_.size()); }
  int n_periods() const { return n_waves() - 1; }
  const DirectedNetwork& wave(int m) const { return waves_.at(static_cast<std::size_t>(m)); }
  const std::vector<DirectedNetwork>& waves() const { return waves_; }
  const CovariateSet& covariates() const { return covariates_; }
  const std::vector<std::string>& actor_labels() const { return labels_; }

  const ActorCovariate& covariate(const std::string& name) const {
    auto it = covariates_.find(name);
    if (it == covariates_.end()) throw ConfigError("unknown covariate '" + name + "'");
    return it->second;
  }

 private:
  std::vector<DirectedNetwork> waves_;
  CovariateSet covariates_;
  std::vector<std::string> labels_;
};

}  // namespace saom

#endif
