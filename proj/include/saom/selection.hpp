#ifndef SAOM_SELECTION_HPP
#define SAOM_SELECTION_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "saom/mathutil.hpp"
#include "saom/network.hpp"

namespace saom {

// Quadratic social selection function
//   a(v_j | v_i) = t1 (v_j - v_i)^2 + t2 v_j^2 + t3 v_j + t4 v_i + t5 v_i^2,
// with theta5 = 0 for the four-parameter variant. The covariate range
// supplies the bounds and mean used by the interpretation machinery.
struct QuadraticSelection {
  double theta1 = 0.0;  // (v_j - v_i)^2; -theta1 is the homophily weight
  double theta2 = 0.0;  // v_j^2; -theta2 is the conformity weight
  double theta3 = 0.0;  // v_j
  double theta4 = 0.0;  // v_i
  double theta5 = 0.0;  // v_i^2
  CovariateRange cov;
};

enum class LegacyFamily {
  abs_difference,       // b1 |v_i - v_j|
  abs_difference_main,  // b1 v_i + b2 v_j + b3 |v_i - v_j|
  ego_alter_product,    // b1 v_i + b2 v_j + b3 v_i v_j
  pure_quadratic,       // b1 (v_j - v_i)^2
};

struct LegacySelection {
  LegacyFamily family;
  std::vector<double> betas;

  LegacySelection(LegacyFamily f, std::vector<double> b) : family(f), betas(std::move(b)) {
    const std::size_t want =
        (family == LegacyFamily::abs_difference || family == LegacyFamily::pure_quadratic) ? 1 : 3;
    if (betas.size() != want)
      throw std::invalid_argument("LegacySelection: family expects " + std::to_string(want) +
                                  " coefficients, got " + std::to_string(betas.size()));
  }
};

inline double evaluate(const QuadraticSelection& s, double v_i, double v_j) {
  const double d = v_j - v_i;
  return s.theta1 * d * d + s.theta2 * v_j * v_j + s.theta3 * v_j + s.theta4 * v_i +
         s.theta5 * v_i * v_i;
}

inline double evaluate(const LegacySelection& s, double v_i, double v_j) {
  switch (s.family) {
    case LegacyFamily::abs_difference:
      return s.betas[0] * std::fabs(v_i - v_j);
    case LegacyFamily::abs_difference_main:
      return s.betas[0] * v_i + s.betas[1] * v_j + s.betas[2] * std::fabs(v_i - v_j);
    case LegacyFamily::ego_alter_product:
      return s.betas[0] * v_i + s.betas[1] * v_j + s.betas[2] * v_i * v_j;
    case LegacyFamily::pure_quadratic: {
      const double d = v_j - v_i;
      return s.betas[0] * d * d;
    }
  }
  return 0.0;  // unreachable
}

// ---------------------------------------------------------------------------
// Optimum geometry

struct OptimumLocation {
  double argmax = 0.0;
  bool clamped = false;
};

// Unimodal case t1 + t2 < 0: the ideal point is the weighted mean
// (t1 v_i - t3/2) / (t1 + t2), truncated to the covariate range.
inline OptimumLocation optimum_location(const QuadraticSelection& s, double v_i) {
  const double curv = s.theta1 + s.theta2;
  if (!(curv < 0.0))
    throw std::domain_error(
        "optimum_location: theta1 + theta2 >= 0 (not unimodal); use boundary_argmax");
  const double raw = (s.theta1 * v_i - 0.5 * s.theta3) / curv;
  const double clamped = std::clamp(raw, s.cov.min, s.cov.max);
  return {clamped, clamped != raw};
}

// Convex / linear case: the maximum over [V-, V+] sits at an endpoint.
// Ties break toward the upper end.
inline double boundary_argmax(const QuadraticSelection& s, double v_i) {
  const double lo = evaluate(s, v_i, s.cov.min);
  const double hi = evaluate(s, v_i, s.cov.max);
  return hi >= lo ? s.cov.max : s.cov.min;
}

// Maximizer of a(. | v_i) over the covariate range for any parameter signs.
inline double argmax_over_range(const QuadraticSelection& s, double v_i) {
  if (s.theta1 + s.theta2 < 0.0) return optimum_location(s, v_i).argmax;
  return boundary_argmax(s, v_i);
}

// a^opt(v_i) = max_{v_j in [V-, V+]} a(v_j | v_i), via the closed-form
// argmax. The printed closed form for the optimum value is not used; it
// disagrees with direct algebra, and substituting the argmax is exact.
inline double optimum_value(const QuadraticSelection& s, double v_i) {
  return evaluate(s, v_i, argmax_over_range(s, v_i));
}

// ---------------------------------------------------------------------------
// a^opt as an explicit piecewise quadratic in v_i.
//
// With the argmax clamped to the covariate range, a^opt(v_i) consists of
// at most three quadratic pieces (argmax at V-, interior, at V+) in the
// unimodal case, and at most two (argmax switching endpoint) otherwise.
// The pieces make exact monotonicity checks possible.

struct OptimumPiece {
  enum class Argmax { lower_bound, interior, upper_bound };
  double lo = 0.0, hi = 0.0;        // v_i interval
  double a = 0.0, b = 0.0, c = 0.0; // a^opt(v) = a v^2 + b v + c on [lo, hi]
  Argmax argmax = Argmax::interior;
};

namespace detail {

// Coefficients of v -> evaluate(s, v, B), alter fixed at boundary B.
inline OptimumPiece boundary_piece(const QuadraticSelection& s, double lo, double hi, double B,
                                   OptimumPiece::Argmax kind) {
  OptimumPiece p;
  p.lo = lo;
  p.hi = hi;
  p.a = s.theta1 + s.theta5;
  p.b = -2.0 * s.theta1 * B + s.theta4;
  p.c = (s.theta1 + s.theta2) * B * B + s.theta3 * B;
  p.argmax = kind;
  return p;
}

// Coefficients of the interior branch, obtained by maximizing the
// quadratic in v_j analytically: with A = t1 + t2 < 0,
//   a^opt(v) = (t1 + t5 - t1^2/A) v^2 + (t4 + t1 t3 / A) v - t3^2/(4A).
inline OptimumPiece interior_piece(const QuadraticSelection& s, double lo, double hi) {
  const double A = s.theta1 + s.theta2;
  OptimumPiece p;
  p.lo = lo;
  p.hi = hi;
  p.a = s.theta1 + s.theta5 - s.theta1 * s.theta1 / A;
  p.b = s.theta4 + s.theta1 * s.theta3 / A;
  p.c = -s.theta3 * s.theta3 / (4.0 * A);
  p.argmax = OptimumPiece::Argmax::interior;
  return p;
}

}  // namespace detail

inline std::vector<OptimumPiece> optimum_pieces(const QuadraticSelection& s) {
  const double vlo = s.cov.min, vhi = s.cov.max;
  const double A = s.theta1 + s.theta2;
  std::vector<OptimumPiece> pieces;
  auto push = [&](double lo, double hi, OptimumPiece::Argmax kind) {
    lo = std::max(lo, vlo);
    hi = std::min(hi, vhi);
    if (!(lo < hi)) return;
    switch (kind) {
      case OptimumPiece::Argmax::lower_bound:
        pieces.push_back(detail::boundary_piece(s, lo, hi, vlo, kind));
        break;
      case OptimumPiece::Argmax::upper_bound:
        pieces.push_back(detail::boundary_piece(s, lo, hi, vhi, kind));
        break;
      case OptimumPiece::Argmax::interior:
        pieces.push_back(detail::interior_piece(s, lo, hi));
        break;
    }
  };

  if (A < 0.0) {
    // Unclamped argmax is linear in v_i: slope t1/A, intercept -t3/(2A).
    const double slope = s.theta1 / A;
    const double icpt = -0.5 * s.theta3 / A;
    if (slope == 0.0) {
      if (icpt < vlo)
        push(vlo, vhi, OptimumPiece::Argmax::lower_bound);
      else if (icpt > vhi)
        push(vlo, vhi, OptimumPiece::Argmax::upper_bound);
      else
        push(vlo, vhi, OptimumPiece::Argmax::interior);
    } else {
      const double t_at_lo = (vlo - icpt) / slope;  // argmax == V-
      const double t_at_hi = (vhi - icpt) / slope;  // argmax == V+
      if (slope > 0.0) {
        push(vlo, t_at_lo, OptimumPiece::Argmax::lower_bound);
        push(std::max(t_at_lo, vlo), std::min(t_at_hi, vhi), OptimumPiece::Argmax::interior);
        push(t_at_hi, vhi, OptimumPiece::Argmax::upper_bound);
      } else {
        push(vlo, t_at_hi, OptimumPiece::Argmax::upper_bound);
        push(std::max(t_at_hi, vlo), std::min(t_at_lo, vhi), OptimumPiece::Argmax::interior);
        push(t_at_lo, vhi, OptimumPiece::Argmax::lower_bound);
      }
    }
  } else {
    // Convex or linear in v_j: optimum at an endpoint. The difference
    // a(V+|v) - a(V-|v) is linear in v with slope -2 t1 (V+ - V-).
    const double diff_slope = -2.0 * s.theta1 * (vhi - vlo);
    const double diff_at_lo =
        evaluate(s, vlo, vhi) - evaluate(s, vlo, vlo);  // diff at v_i = V-
    if (diff_slope == 0.0) {
      push(vlo, vhi,
           diff_at_lo >= 0.0 ? OptimumPiece::Argmax::upper_bound
                             : OptimumPiece::Argmax::lower_bound);
    } else {
      const double t_switch = vlo - diff_at_lo / diff_slope;  // diff == 0
      const auto first = diff_slope > 0.0 ? OptimumPiece::Argmax::lower_bound
                                          : OptimumPiece::Argmax::upper_bound;
      const auto second = diff_slope > 0.0 ? OptimumPiece::Argmax::upper_bound
                                           : OptimumPiece::Argmax::lower_bound;
      if (t_switch <= vlo) {
        push(vlo, vhi, second);
      } else if (t_switch >= vhi) {
        push(vlo, vhi, first);
      } else {
        push(vlo, t_switch, first);
        push(t_switch, vhi, second);
      }
    }
  }
  return pieces;
}

// ---------------------------------------------------------------------------
// Social norm and attraction weights

struct NormEstimate {
  double value = 0.0;
  std::optional<double> std_error;
  bool in_range = false;
};

// Parameter covariance over (theta1..theta5), in that order.
using ThetaCov = std::array<std::array<double, 5>, 5>;

constexpr double kNormTheta2Tolerance = 1e-10;

// V^norm = -t3 / (2 t2). The optional covariance yields a delta-method
// standard error with gradient (t3/(2 t2^2), -1/(2 t2)) over (t2, t3).
inline NormEstimate social_norm(const QuadraticSelection& s,
                                const std::optional<ThetaCov>& cov = {}) {
  if (std::fabs(s.theta2) < kNormTheta2Tolerance)
    throw std::domain_error(
        "social_norm: theta2 is (numerically) zero; the norm is undefined and the alter "
        "terms reduce to pure linear aspiration with slope theta3");
  NormEstimate out;
  out.value = -s.theta3 / (2.0 * s.theta2);
  out.in_range = out.value >= s.cov.min && out.value <= s.cov.max;
  if (cov) {
    const double d2 = s.theta3 / (2.0 * s.theta2 * s.theta2);
    const double d3 = -1.0 / (2.0 * s.theta2);
    const auto& m = *cov;
    const double var = d2 * d2 * m[1][1] + 2.0 * d2 * d3 * m[1][2] + d3 * d3 * m[2][2];
    out.std_error = std::sqrt(std::max(var, 0.0));
  }
  return out;
}

struct AttractionWeights {
  double homophily = 0.0;   // theta1 / (theta1 + theta2)
  double conformity = 0.0;  // theta2 / (theta1 + theta2)
};

inline AttractionWeights attraction_weights(const QuadraticSelection& s) {
  const double denom = s.theta1 + s.theta2;
  if (denom == 0.0)
    throw std::domain_error("attraction_weights: theta1 + theta2 == 0 (degenerate weights)");
  const double homophily = s.theta1 / denom;
  return {homophily, 1.0 - homophily};  // the pair sums to 1 exactly
}

// ---------------------------------------------------------------------------
// Aspiration

enum class AspirationLevel { none, weak, medium, strong };

inline std::string to_string(AspirationLevel l) {
  switch (l) {
    case AspirationLevel::none: return "none";
    case AspirationLevel::weak: return "weak";
    case AspirationLevel::medium: return "medium";
    case AspirationLevel::strong: return "strong";
  }
  return "none";
}

struct AspirationTest {
  std::array<double, 5> combination{};  // c over (theta1..theta5)
  double value = 0.0;                   // c' theta
  bool point_condition = false;
  std::optional<double> std_error;
  std::optional<double> p_right;        // one-sided, N(0,1) reference
};

struct AspirationVerdict {
  AspirationLevel level = AspirationLevel::none;
  AspirationTest strong, medium, weak;
};

namespace detail {

inline AspirationTest make_aspiration_test(const QuadraticSelection& s,
                                           const std::array<double, 5>& c,
                                           bool point_condition,
                                           const std::optional<ThetaCov>& cov) {
  AspirationTest t;
  t.combination = c;
  const std::array<double, 5> theta{s.theta1, s.theta2, s.theta3, s.theta4, s.theta5};
  for (int k = 0; k < 5; ++k) t.value += c[k] * theta[k];
  t.point_condition = point_condition;
  if (cov) {
    double var = 0.0;
    for (int k = 0; k < 5; ++k)
      for (int l = 0; l < 5; ++l) var += c[k] * (*cov)[k][l] * c[l];
    const double se = std::sqrt(std::max(var, 0.0));
    t.std_error = se;
    if (se > 0.0) t.p_right = normal_sf(t.value / se);
  }
  return t;
}

}  // namespace detail

// Three nested definitions of an aspiration aspect, strongest first:
//  1. strong: a(.|v_i) is increasing in v_j over the whole range for
//     every v_i; tested by t3 + 2 t2 V+ + 2 t1 (V+ - V-).
//  2. medium: the norm terms t2 v^2 + t3 v are increasing over the
//     range; the binding endpoint for the derivative is V+ when t2 <= 0
//     and V- when t2 > 0; tested by t3 + 2 t2 (endpoint).
//  3. weak: the norm-term derivative is nonnegative at the covariate
//     mean; tested by t3 + 2 t2 Vbar (just t3 for centered covariates).
// A contribution that is identically constant (all relevant
// coefficients zero) satisfies no definition; a flat function aspires
// to nothing. The level reports the highest definition satisfied at
// the point estimates; the one-sided p-values are reported alongside
// and do not enter the level.
inline AspirationVerdict classify_aspiration(const QuadraticSelection& s,
                                             const std::optional<ThetaCov>& cov = {}) {
  const double vlo = s.cov.min, vhi = s.cov.max, vbar = s.cov.mean;
  AspirationVerdict out;
  const bool alter_flat = s.theta1 == 0.0 && s.theta2 == 0.0 && s.theta3 == 0.0;
  const bool norm_flat = s.theta2 == 0.0 && s.theta3 == 0.0;

  // strong: min of the v_j-derivative 2(t1+t2)v_j - 2 t1 v_i + t3 over
  // the corner points (the derivative is linear in both arguments)
  double min_deriv = std::numeric_limits<double>::infinity();
  for (double vi : {vlo, vhi})
    for (double vj : {vlo, vhi})
      min_deriv = std::min(min_deriv, 2.0 * (s.theta1 + s.theta2) * vj - 2.0 * s.theta1 * vi + s.theta3);
  out.strong = detail::make_aspiration_test(
      s, {2.0 * (vhi - vlo), 2.0 * vhi, 1.0, 0.0, 0.0}, !alter_flat && min_deriv >= 0.0, cov);

  const double medium_endpoint = s.theta2 > 0.0 ? vlo : vhi;
  const double medium_value = s.theta3 + 2.0 * s.theta2 * medium_endpoint;
  out.medium = detail::make_aspiration_test(
      s, {0.0, 2.0 * medium_endpoint, 1.0, 0.0, 0.0}, !norm_flat && medium_value >= 0.0, cov);

  const double weak_value = s.theta3 + 2.0 * s.theta2 * vbar;
  out.weak = detail::make_aspiration_test(
      s, {0.0, 2.0 * vbar, 1.0, 0.0, 0.0}, !norm_flat && weak_value >= 0.0, cov);

  if (out.strong.point_condition)
    out.level = AspirationLevel::strong;
  else if (out.medium.point_condition)
    out.level = AspirationLevel::medium;
  else if (out.weak.point_condition)
    out.level = AspirationLevel::weak;
  else
    out.level = AspirationLevel::none;
  return out;
}

// ---------------------------------------------------------------------------
// Sociability

struct SociabilityVerdict {
  bool strong = false;  // derivative in v_i nonnegative on the whole rectangle
  bool weak = false;    // a^opt nondecreasing on [V-, V+]
  std::vector<std::array<double, 2>> optimum_curve;  // sampled (v_i, a^opt)
};

// strong: the v_i-derivative 2(t1+t5)v_i - 2 t1 v_j + t4 is linear in
// both arguments, so corner checks are exact.
// weak: checked exactly on each quadratic piece of a^opt; the sampled
// curve is returned for plotting. A selection function with no v_i
// dependence at all (flat derivative / flat optimum curve) carries no
// sociability aspect.
inline SociabilityVerdict classify_sociability(const QuadraticSelection& s, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("classify_sociability: grid_size must be >= 2");
  const double vlo = s.cov.min, vhi = s.cov.max;
  SociabilityVerdict out;

  double min_deriv = std::numeric_limits<double>::infinity();
  for (double vi : {vlo, vhi})
    for (double vj : {vlo, vhi})
      min_deriv = std::min(min_deriv,
                           2.0 * (s.theta1 + s.theta5) * vi - 2.0 * s.theta1 * vj + s.theta4);
  const bool ego_flat = s.theta1 == 0.0 && s.theta4 == 0.0 && s.theta5 == 0.0;
  out.strong = !ego_flat && min_deriv >= 0.0;

  out.weak = true;
  bool curve_varies = false;
  const double scale = std::max({1.0, std::fabs(s.theta1), std::fabs(s.theta2),
                                 std::fabs(s.theta3), std::fabs(s.theta4), std::fabs(s.theta5)}) *
                       std::max(1.0, std::max(std::fabs(vlo), std::fabs(vhi)));
  const double tol = 1e-12 * scale;
  for (const OptimumPiece& p : optimum_pieces(s)) {
    // piece derivative 2 a v + b is monotone; endpoint minimum suffices
    const double d_lo = 2.0 * p.a * p.lo + p.b;
    const double d_hi = 2.0 * p.a * p.hi + p.b;
    if (p.a != 0.0 || p.b != 0.0) curve_varies = true;
    if (std::min(d_lo, d_hi) < -tol) {
      out.weak = false;
      break;
    }
  }
  out.weak = out.weak && curve_varies;

  out.optimum_curve.reserve(static_cast<std::size_t>(grid_size));
  for (int k = 0; k < grid_size; ++k) {
    const double v = vlo + (vhi - vlo) * static_cast<double>(k) / (grid_size - 1);
    out.optimum_curve.push_back({v, optimum_value(s, v)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Selection tables (plot data)

struct AlterGrid {
  double lo = 0.0;
  double hi = 0.0;
  int points = 0;
};

struct SelectionTable {
  std::vector<std::array<double, 3>> rows;      // (v_ego, v_alter, value)
  std::vector<std::array<double, 2>> optimum;   // (v_ego, a^opt(v_ego))
};

inline SelectionTable selection_table(const QuadraticSelection& s,
                                      const std::vector<double>& ego_values,
                                      const AlterGrid& grid) {
  if (grid.points < 2) throw std::invalid_argument("selection_table: grid needs >= 2 points");
  for (double vi : ego_values)
    if (vi < s.cov.min || vi > s.cov.max)
      throw std::invalid_argument("selection_table: ego value outside the covariate range");
  SelectionTable t;
  t.rows.reserve(ego_values.size() * static_cast<std::size_t>(grid.points));
  for (double vi : ego_values) {
    for (int k = 0; k < grid.points; ++k) {
      const double vj = grid.lo + (grid.hi - grid.lo) * static_cast<double>(k) / (grid.points - 1);
      t.rows.push_back({vi, vj, evaluate(s, vi, vj)});
    }
    t.optimum.push_back({vi, optimum_value(s, vi)});
  }
  return t;
}

// Legacy families have no closed-form optimum machinery here; the
// maximum column is taken over the alter grid.
inline SelectionTable selection_table(const LegacySelection& s,
                                      const std::vector<double>& ego_values,
                                      const AlterGrid& grid) {
  if (grid.points < 2) throw std::invalid_argument("selection_table: grid needs >= 2 points");
  SelectionTable t;
  t.rows.reserve(ego_values.size() * static_cast<std::size_t>(grid.points));
  for (double vi : ego_values) {
    double best = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < grid.points; ++k) {
      const double vj = grid.lo + (grid.hi - grid.lo) * static_cast<double>(k) / (grid.points - 1);
      const double val = evaluate(s, vi, vj);
      best = std::max(best, val);
      t.rows.push_back({vi, vj, val});
    }
    t.optimum.push_back({vi, best});
  }
  return t;
}

}  // namespace saom

#endif
