#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "saom/random.hpp"
#include "saom/selection.hpp"

using namespace saom;

namespace {

// Reference estimates used throughout: an advice network with academic
// grades (centered, range [-6, 4]) and age (centered, range [-5, 11]).
QuadraticSelection grades_selection() {
  return {-0.0288, -0.003, 0.044, -0.095, 0.026, {-6.0, 4.0, 0.0}};
}

QuadraticSelection age_selection() {
  return {-0.0014, -0.0070, 0.039, 0.038, -0.0071, {-5.0, 11.0, 0.0}};
}

ThetaCov diag_cov(std::array<double, 5> sds) {
  ThetaCov m{};
  for (std::size_t k = 0; k < 5; ++k) m[k][k] = sds[k] * sds[k];
  return m;
}

QuadraticSelection random_selection(RandomEngine& rng, int curvature_sign) {
  // curvature_sign < 0 forces theta1+theta2 < 0; > 0 forces >= 0; 0 = any
  QuadraticSelection s;
  for (;;) {
    s.theta1 = 2.0 * rng.uniform01() - 1.0;
    s.theta2 = 2.0 * rng.uniform01() - 1.0;
    const double a = s.theta1 + s.theta2;
    if (curvature_sign == 0 || (curvature_sign < 0 && a < 0) || (curvature_sign > 0 && a >= 0))
      break;
  }
  s.theta3 = 2.0 * rng.uniform01() - 1.0;
  s.theta4 = 2.0 * rng.uniform01() - 1.0;
  s.theta5 = 2.0 * rng.uniform01() - 1.0;
  const double lo = -5.0 + 4.0 * rng.uniform01();
  const double hi = lo + 0.5 + 5.0 * rng.uniform01();
  const double mean = lo + (hi - lo) * rng.uniform01();
  s.cov = {lo, hi, mean};
  return s;
}

double grid_max(const QuadraticSelection& s, double vi, int points) {
  double best = -1e300;
  for (int k = 0; k < points; ++k) {
    const double vj = s.cov.min + (s.cov.max - s.cov.min) * k / (points - 1.0);
    best = std::max(best, evaluate(s, vi, vj));
  }
  return best;
}

}  // namespace

TEST_CASE("evaluate: zero parameters give the zero function") {
  QuadraticSelection s{0, 0, 0, 0, 0, {-1, 1, 0}};
  CHECK(evaluate(s, 0.3, -0.7) == 0.0);
  CHECK(evaluate(s, -1, 1) == 0.0);
}

TEST_CASE("evaluate: grades parameters at (0, 4)") {
  CHECK(evaluate(grades_selection(), 0.0, 4.0) == Catch::Approx(-0.3328).margin(1e-12));
}

TEST_CASE("evaluate: pure homophily shape") {
  QuadraticSelection s{-1, 0, 0, 0, 0, {-3, 3, 0}};
  CHECK(evaluate(s, 1.2, 1.2) == 0.0);
  CHECK(evaluate(s, 1.0, 1.5) == Catch::Approx(-0.25));
}

TEST_CASE("evaluate: legacy families") {
  LegacySelection abs(LegacyFamily::abs_difference, {-0.5});
  CHECK(evaluate(abs, 1.0, 3.0) == Catch::Approx(-1.0));
  LegacySelection main(LegacyFamily::abs_difference_main, {0.2, 0.3, -0.4});
  CHECK(evaluate(main, 1.0, 2.0) == Catch::Approx(0.2 + 0.6 - 0.4));
  LegacySelection prod(LegacyFamily::ego_alter_product, {0.1, 0.2, 0.3});
  CHECK(evaluate(prod, 2.0, 3.0) == Catch::Approx(0.2 + 0.6 + 1.8));
  LegacySelection quad(LegacyFamily::pure_quadratic, {-1.0});
  CHECK(evaluate(quad, 1.0, 3.0) == Catch::Approx(-4.0));
  CHECK_THROWS_AS(LegacySelection(LegacyFamily::abs_difference_main, {1.0}),
                  std::invalid_argument);
}

TEST_CASE("reparameterization: the two four-parameter forms differ by a constant in v_j") {
  // a(vj|vi) - a(V-|vi) must agree between the linear form and the
  // completed-square form for any inputs
  RandomEngine rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    QuadraticSelection s = random_selection(rng, 0);
    if (std::fabs(s.theta2) < 1e-3) continue;
    auto completed = [&](double vi, double vj) {
      const double shift = vj + s.theta3 / (2.0 * s.theta2);
      return s.theta1 * (vj - vi) * (vj - vi) + s.theta2 * shift * shift + s.theta4 * vi +
             s.theta5 * vi * vi;
    };
    const double vi = s.cov.min + (s.cov.max - s.cov.min) * rng.uniform01();
    const double vj = s.cov.min + (s.cov.max - s.cov.min) * rng.uniform01();
    const double lhs = evaluate(s, vi, vj) - evaluate(s, vi, s.cov.min);
    const double rhs = completed(vi, vj) - completed(vi, s.cov.min);
    REQUIRE(lhs == Catch::Approx(rhs).margin(1e-10 * (1.0 + std::fabs(lhs))));
  }
}

TEST_CASE("optimum_location: pure homophily ideal point is ego's value") {
  QuadraticSelection s{-0.5, 0, 0, 0, 0, {-2, 2, 0}};
  auto loc = optimum_location(s, 0.7);
  CHECK(loc.argmax == Catch::Approx(0.7));
  CHECK_FALSE(loc.clamped);
}

TEST_CASE("optimum_location: pure conformity ideal point is the norm for every ego") {
  QuadraticSelection s{0, -0.5, 0.4, 0, 0, {-2, 2, 0}};
  const double norm = -0.4 / (2.0 * -0.5);
  for (double vi : {-2.0, 0.0, 1.5})
    CHECK(optimum_location(s, vi).argmax == Catch::Approx(norm));
}

TEST_CASE("optimum_location: grades row at ego 0") {
  auto loc = optimum_location(grades_selection(), 0.0);
  CHECK(loc.argmax == Catch::Approx(0.6918).margin(5e-5));
  CHECK_FALSE(loc.clamped);
}

TEST_CASE("optimum_location: clamping and the non-unimodal error") {
  QuadraticSelection s{-1, 0, 0, 0, 0, {-1, 1, 0}};
  auto loc = optimum_location(s, 5.0);  // ego value outside the range is a legal input
  CHECK(loc.argmax == 1.0);
  CHECK(loc.clamped);
  QuadraticSelection convex{1, 0.5, 0, 0, 0, {-1, 1, 0}};
  CHECK_THROWS_AS(optimum_location(convex, 0.0), std::domain_error);
}

TEST_CASE("boundary_argmax: symmetric convex ties break to the upper bound") {
  QuadraticSelection s{0, 1, 0, 0, 0, {-1, 1, 0}};
  CHECK(boundary_argmax(s, 0.0) == 1.0);
  QuadraticSelection lin{0, 0, 1, 0, 0, {-1, 1, 0}};
  CHECK(boundary_argmax(lin, 0.0) == 1.0);
  QuadraticSelection dec{0, 0, -1, 0, 0, {-1, 1, 0}};
  CHECK(boundary_argmax(dec, 0.0) == -1.0);
}

TEST_CASE("boundary_argmax agrees with a grid search") {
  RandomEngine rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    QuadraticSelection s = random_selection(rng, +1);
    const double vi = s.cov.min + (s.cov.max - s.cov.min) * rng.uniform01();
    const double got = evaluate(s, vi, boundary_argmax(s, vi));
    const double h = (s.cov.max - s.cov.min) / 9999.0;
    const double bound = 1e-9 + std::fabs(s.theta1 + s.theta2) * h * h;
    REQUIRE(got >= grid_max(s, vi, 10000) - bound);
  }
}

TEST_CASE("optimum_value: trivial cases") {
  QuadraticSelection zero{0, 0, 0, 0, 0, {-1, 1, 0}};
  CHECK(optimum_value(zero, 0.5) == 0.0);
  QuadraticSelection hom{-1, 0, 0, 0, 0, {-2, 2, 0}};
  CHECK(optimum_value(hom, 0.3) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("optimum_value matches the brute-force grid") {
  RandomEngine rng(41);
  for (int rep = 0; rep < 400; ++rep) {
    QuadraticSelection s = random_selection(rng, rep % 2 == 0 ? -1 : +1);
    const double vi = s.cov.min + (s.cov.max - s.cov.min) * rng.uniform01();
    const double exact = optimum_value(s, vi);
    const double h = (s.cov.max - s.cov.min) / 9999.0;
    const double bound = 1e-9 + std::fabs(s.theta1 + s.theta2) * h * h;
    const double gridded = grid_max(s, vi, 10000);
    REQUIRE(exact >= gridded - 1e-9);
    REQUIRE(exact <= gridded + bound);
  }
}

TEST_CASE("optimum pieces reproduce optimum_value everywhere") {
  RandomEngine rng(51);
  for (int rep = 0; rep < 300; ++rep) {
    QuadraticSelection s = random_selection(rng, 0);
    const auto pieces = optimum_pieces(s);
    REQUIRE_FALSE(pieces.empty());
    CHECK(pieces.front().lo == Catch::Approx(s.cov.min));
    CHECK(pieces.back().hi == Catch::Approx(s.cov.max));
    for (std::size_t k = 1; k < pieces.size(); ++k)
      CHECK(pieces[k].lo == Catch::Approx(pieces[k - 1].hi));
    for (const auto& p : pieces) {
      for (double frac : {0.0, 0.31, 0.77, 1.0}) {
        const double v = p.lo + (p.hi - p.lo) * frac;
        const double from_piece = p.a * v * v + p.b * v + p.c;
        REQUIRE(from_piece ==
                Catch::Approx(optimum_value(s, v)).margin(1e-9 * (1.0 + std::fabs(from_piece))));
      }
    }
  }
}

TEST_CASE("social_norm golden values") {
  auto age = social_norm(age_selection());
  CHECK(age.value == Catch::Approx(2.7857).margin(1e-3));
  CHECK(age.in_range);
  auto grades = social_norm(grades_selection());
  CHECK(grades.value == Catch::Approx(7.3333).margin(1e-3));
  CHECK_FALSE(grades.in_range);
}

TEST_CASE("social_norm delta-method standard error") {
  QuadraticSelection s = age_selection();
  ThetaCov cov = diag_cov({0.0023, 0.0045, 0.019, 0.018, 0.0041});
  auto norm = social_norm(s, cov);
  REQUIRE(norm.std_error.has_value());
  CHECK(*norm.std_error == Catch::Approx(2.247).margin(2e-3));
}

TEST_CASE("social_norm: theta2 ~ 0 signals an undefined norm") {
  QuadraticSelection s{-1, 0, 0.5, 0, 0, {-1, 1, 0}};
  CHECK_THROWS_AS(social_norm(s), std::domain_error);
  s.theta2 = 1e-12;
  CHECK_THROWS_AS(social_norm(s), std::domain_error);
}

TEST_CASE("attraction weights") {
  auto w = attraction_weights(grades_selection());
  CHECK(w.homophily == Catch::Approx(0.906).margin(5e-4));
  CHECK(w.conformity == Catch::Approx(0.094).margin(5e-4));
  CHECK(w.homophily + w.conformity == Catch::Approx(1.0).margin(1e-15));

  QuadraticSelection eq{-0.4, -0.4, 0, 0, 0, {-1, 1, 0}};
  auto we = attraction_weights(eq);
  CHECK(we.homophily == Catch::Approx(0.5));
  CHECK(we.conformity == Catch::Approx(0.5));

  QuadraticSelection pure{-0.4, 0, 0, 0, 0, {-1, 1, 0}};
  auto wp = attraction_weights(pure);
  CHECK(wp.homophily == Catch::Approx(1.0));
  CHECK(wp.conformity == Catch::Approx(0.0).margin(1e-15));

  QuadraticSelection degen{0.4, -0.4, 0, 0, 0, {-1, 1, 0}};
  CHECK_THROWS_AS(attraction_weights(degen), std::domain_error);
}

TEST_CASE("attraction weights sum to exactly 1 on random draws") {
  RandomEngine rng(61);
  for (int rep = 0; rep < 200; ++rep) {
    // proportion regime: both attraction terms concave (theta1, theta2 < 0)
    QuadraticSelection s;
    s.theta1 = -rng.uniform01() - 1e-9;
    s.theta2 = -rng.uniform01() - 1e-9;
    s.cov = {-1, 1, 0};
    auto w = attraction_weights(s);
    REQUIRE(w.homophily + w.conformity == 1.0);
    REQUIRE(w.homophily >= 0.0);
    REQUIRE(w.conformity >= 0.0);
  }
  // outside the proportion regime the identity holds to rounding only
  QuadraticSelection wild{-1.0, 0.999, 0, 0, 0, {-1, 1, 0}};
  auto w = attraction_weights(wild);
  REQUIRE(w.homophily + w.conformity == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("aspiration: grades row is medium but not strong") {
  ThetaCov cov = diag_cov({0.0073, 0.012, 0.032, 0.031, 0.010});
  auto v = classify_aspiration(grades_selection(), cov);
  CHECK(v.level == AspirationLevel::medium);
  CHECK(v.strong.value == Catch::Approx(-0.556).margin(1e-6));
  CHECK_FALSE(v.strong.point_condition);
  CHECK(v.medium.point_condition);
}

TEST_CASE("aspiration: age row is weak (centered covariate, theta3 > 0)") {
  ThetaCov cov = diag_cov({0.0023, 0.0045, 0.019, 0.018, 0.0041});
  auto v = classify_aspiration(age_selection(), cov);
  CHECK(v.level == AspirationLevel::weak);
  // weak combination on a centered covariate is exactly theta3
  CHECK(v.weak.value == Catch::Approx(0.039));
  REQUIRE(v.weak.p_right.has_value());
  CHECK(*v.weak.p_right == Catch::Approx(0.0201).margin(1e-3));
  CHECK(*v.weak.std_error == Catch::Approx(0.019).margin(1e-6));
}

TEST_CASE("aspiration nesting for negative theta1, theta2") {
  RandomEngine rng(71);
  for (int rep = 0; rep < 2000; ++rep) {
    QuadraticSelection s;
    s.theta1 = -rng.uniform01() - 1e-6;
    s.theta2 = -rng.uniform01() - 1e-6;
    s.theta3 = 4.0 * rng.uniform01() - 2.0;
    const double lo = -4.0 + 3.0 * rng.uniform01();
    const double hi = lo + 0.5 + 4.0 * rng.uniform01();
    s.cov = {lo, hi, lo + (hi - lo) * rng.uniform01()};
    auto v = classify_aspiration(s);
    if (v.strong.point_condition) REQUIRE(v.medium.point_condition);
    if (v.medium.point_condition) REQUIRE(v.weak.point_condition);
  }
}

TEST_CASE("aspiration: medium with positive theta2 uses the lower endpoint") {
  // theta2 > 0: the norm-term derivative is minimal at V-
  QuadraticSelection s{-1.0, 0.5, 0.2, 0, 0, {-1, 1, 0}};
  auto v = classify_aspiration(s);
  CHECK_FALSE(v.medium.point_condition);  // 0.2 + 2*0.5*(-1) = -0.8 < 0
  CHECK(v.medium.value == Catch::Approx(0.2 + 2.0 * 0.5 * -1.0));

  QuadraticSelection s2{-1.0, 0.5, 1.2, 0, 0, {-1, 1, 0}};
  auto v2 = classify_aspiration(s2);
  CHECK(v2.medium.point_condition);  // 1.2 - 1.0 >= 0
}

TEST_CASE("sociability: dominant ego effect is strong and weak") {
  QuadraticSelection s{0, -0.5, 0, 2.0, 0, {-1, 1, 0}};
  auto v = classify_sociability(s, 41);
  CHECK(v.strong);
  CHECK(v.weak);
  CHECK(v.optimum_curve.size() == 41);
}

TEST_CASE("sociability: grades row fails even the weak definition") {
  auto v = classify_sociability(grades_selection(), 101);
  CHECK_FALSE(v.weak);
  // the curve visibly decreases on the lower half of the range
  const auto& c = v.optimum_curve;
  CHECK(c.front()[1] > c[c.size() / 2][1]);
}

TEST_CASE("sociability: strong implies weak when unimodal") {
  RandomEngine rng(81);
  int strong_seen = 0;
  for (int rep = 0; rep < 3000; ++rep) {
    QuadraticSelection s = random_selection(rng, -1);
    auto v = classify_sociability(s, 11);
    if (v.strong) {
      ++strong_seen;
      REQUIRE(v.weak);
    }
  }
  CHECK(strong_seen > 10);
}

TEST_CASE("weak sociability agrees with a brute-force grid check") {
  RandomEngine rng(91);
  int decisive = 0;
  for (int rep = 0; rep < 150; ++rep) {
    QuadraticSelection s = random_selection(rng, 0);
    auto v = classify_sociability(s, 11);
    const int grid = 400;
    const double h = (s.cov.max - s.cov.min) / (grid - 1.0);
    const double err = (std::fabs(s.theta1) + std::fabs(s.theta2)) * h * h + 1e-12;
    double max_drop = 0.0;
    double prev = grid_max(s, s.cov.min, grid);
    for (int k = 1; k < grid; ++k) {
      const double cur = grid_max(s, s.cov.min + h * k, grid);
      max_drop = std::max(max_drop, prev - cur);
      prev = cur;
    }
    if (v.weak) {
      REQUIRE(max_drop <= 2.0 * err);  // a nondecreasing verdict forbids visible drops
      ++decisive;
    } else if (max_drop > 2.0 * err) {
      ++decisive;  // grid sees the drop the verdict claims
    }
  }
  CHECK(decisive > 100);
}

TEST_CASE("selection_table: zero parameters give an all-zero grid") {
  QuadraticSelection s{0, 0, 0, 0, 0, {-1, 1, 0}};
  auto t = selection_table(s, {-1.0, 0.0, 1.0}, {-1.0, 1.0, 5});
  CHECK(t.rows.size() == 15);
  for (const auto& r : t.rows) CHECK(r[2] == 0.0);
  for (const auto& o : t.optimum) CHECK(o[1] == 0.0);
}

TEST_CASE("selection_table: per-ego maxima equal optimum_value") {
  QuadraticSelection s = grades_selection();
  std::vector<double> egos{-6.0, -4.0, -2.0, 0.0, 2.0, 4.0};
  auto t = selection_table(s, egos, {s.cov.min, s.cov.max, 2001});
  REQUIRE(t.optimum.size() == egos.size());
  for (std::size_t e = 0; e < egos.size(); ++e) {
    double best = -1e300;
    for (const auto& r : t.rows)
      if (r[0] == egos[e]) best = std::max(best, r[2]);
    CHECK(t.optimum[e][1] >= best - 1e-12);
    CHECK(t.optimum[e][1] <= best + 1e-4);
    CHECK(t.optimum[e][1] == Catch::Approx(optimum_value(s, egos[e])));
  }
}

TEST_CASE("selection_table: legacy family with cancelling coefficients collapses lines") {
  // b1 v_i + b2 v_j + b3 |vi - vj| with b1 = b3: for v_j > v_i the term
  // b3 (v_j - v_i) cancels the ego main effect and the rows fall onto
  // one line
  LegacySelection s(LegacyFamily::abs_difference_main, {-0.4, 0.25, -0.4});
  auto t = selection_table(s, {-2.0, 0.0, 2.0}, {-3.0, 3.0, 61});
  std::vector<double> at_hi;
  for (const auto& r : t.rows)
    if (r[1] == 3.0 && r[1] > r[0]) at_hi.push_back(r[2]);
  REQUIRE(at_hi.size() == 3);
  CHECK(at_hi[0] == Catch::Approx(at_hi[1]).margin(1e-12));
  CHECK(at_hi[1] == Catch::Approx(at_hi[2]).margin(1e-12));
}

TEST_CASE("basis equivalence: egoXaltX and egoSqX parameterizations span the same surfaces") {
  // v_i^2 = (v_j - v_i)^2 + 2 v_i v_j - v_j^2 maps between the bases
  RandomEngine rng(101);
  for (int rep = 0; rep < 500; ++rep) {
    QuadraticSelection s = random_selection(rng, 0);
    const double c1 = s.theta1 + s.theta5;
    const double c2 = s.theta2 - s.theta5;
    const double c3 = s.theta3;
    const double c4 = s.theta4;
    const double c5 = 2.0 * s.theta5;
    const double vi = 6.0 * rng.uniform01() - 3.0;
    const double vj = 6.0 * rng.uniform01() - 3.0;
    const double alt_basis =
        c1 * (vj - vi) * (vj - vi) + c2 * vj * vj + c3 * vj + c4 * vi + c5 * vi * vj;
    const double direct = evaluate(s, vi, vj);
    REQUIRE(direct == Catch::Approx(alt_basis).margin(1e-12 * (1.0 + std::fabs(direct))));
  }
}

TEST_CASE("delta-method SE matches Monte Carlo when theta2 varies little") {
  RandomEngine rng(111);
  const double t2 = -0.0070, t3 = 0.039;
  const double s2 = 0.0005, s3 = 0.002;  // CV(theta2) = 0.071
  const int n = 20000;
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double d2 = t2 + s2 * rng.normal();
    const double d3 = t3 + s3 * rng.normal();
    const double r = -d3 / (2.0 * d2);
    sum += r;
    sum2 += r * r;
  }
  const double mc_sd = std::sqrt((sum2 - sum * sum / n) / (n - 1));
  QuadraticSelection s{0, t2, t3, 0, 0, {-5, 11, 0}};
  ThetaCov cov{};
  cov[1][1] = s2 * s2;
  cov[2][2] = s3 * s3;
  auto norm = social_norm(s, cov);
  REQUIRE(norm.std_error.has_value());
  CHECK(mc_sd / *norm.std_error == Catch::Approx(1.0).margin(0.05));
}
