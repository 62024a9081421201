#include <cmath>

#include <doctest.h>

#include "horizon/lipschitz.hpp"

using namespace horizon;

TEST_CASE("Lipschitz battery verdicts match the singular-cone biconditional") {
  SamplingPlan plan;
  struct Case {
    const char* text;
    int dim;
    bool lipschitz;
  };
  const std::vector<Case> battery = {
      {"abs(x1)", 1, true},
      {"sqrt(abs(x1) + abs(x2))", 2, true},
      {"max(x1, 2*x1)", 1, true},
      {"exp(x1)", 1, false},
      {"x1^3", 1, false},
      {"2*x1 - 3", 1, true},
  };
  for (const auto& c : battery) {
    const FunctionSpec f = parse_function(c.text, c.dim);
    const LipschitzReport rep = lipschitz_at_infinity(f, plan);
    const LimitSet sing = estimate_singular_at_infinity(f, plan);
    CHECK(rep.verdict.verdict == (c.lipschitz ? Verdict::kHolds : Verdict::kFails));
    CHECK(sing.is_zero_cone() == c.lipschitz);
    if (rep.verdict.verdict == Verdict::kHolds) {
      REQUIRE(rep.L_estimate.has_value());
      const LimitSet lim = estimate_subdiff_at_infinity(f, plan);
      CHECK_FALSE(lim.empty());
      for (const auto& p : lim.points) CHECK(norm2(p) <= *rep.L_estimate + 0.05);
    }
  }
}

TEST_CASE("affine L estimate is the gradient norm") {
  SamplingPlan plan;
  const LipschitzReport rep = lipschitz_at_infinity(make_affine({3.0, 4.0}, 1.0), plan);
  CHECK(rep.verdict.verdict == Verdict::kHolds);
  CHECK(*rep.L_estimate == doctest::Approx(5.0).epsilon(1e-6));
}

TEST_CASE("extended-valued functions fail with a reason") {
  SamplingPlan plan;
  const FunctionSpec d = parse_function("indicator(set { x1 >= 0; }) + x1", 1);
  const LipschitzReport rep = lipschitz_at_infinity(d, plan);
  CHECK(rep.verdict.verdict == Verdict::kFails);
  REQUIRE(!rep.verdict.trace.empty());
  CHECK(rep.verdict.trace[0].find("extended-valued") != std::string::npos);
}

TEST_CASE("difference quotients respect the estimated constant") {
  SamplingPlan plan;
  for (const char* text : {"abs(x1)", "2*x1 - 3"}) {
    const FunctionSpec f = parse_function(text, 1);
    const LipschitzReport rep = lipschitz_at_infinity(f, plan);
    REQUIRE(rep.verdict.verdict == Verdict::kHolds);
    const double L = *rep.L_estimate;
    const double R = rep.R_estimate;
    for (int i = 0; i < 200; ++i) {
      const double x = R + 1 + i * 0.37;
      const double y = R + 2 + i * 0.53;
      const double q = std::fabs(evaluate(f, {x}) - evaluate(f, {y})) / std::fabs(x - y);
      CHECK(q <= L * 1.02 + 1e-9);
    }
  }
}

TEST_CASE("clarke hull of |x| is the interval [-1, 1]") {
  SamplingPlan plan;
  const LimitSet hull = clarke_at_infinity(parse_function("abs(x1)", 1), plan);
  CHECK(hull.convex);
  REQUIRE(hull.points.size() == 2);
  CHECK(hull.points[0][0] == doctest::Approx(-1.0).epsilon(1e-7));
  CHECK(hull.points[1][0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(dist_to(hull, {0.0}) <= 1e-9);  // midpoint inside the hull
  // idempotence
  const LimitSet hull2 = convex_hull_of(hull);
  CHECK(hausdorff_trunc(hull, hull2, 2.0) == doctest::Approx(0.0));
}

TEST_CASE("clarke hull of affine functions is a singleton") {
  SamplingPlan plan;
  const LimitSet hull = clarke_at_infinity(make_affine({2.0, -1.0}, 0.0), plan);
  REQUIRE(hull.points.size() == 1);
  CHECK(dist2(hull.points[0], {2.0, -1.0}) <= 1e-7);
}

TEST_CASE("clarke hull refuses non-Lipschitz functions") {
  SamplingPlan plan;
  CHECK_THROWS_AS((void)clarke_at_infinity(parse_function("exp(x1)", 1), plan), Error);
}

TEST_CASE("piecewise-linear exact path") {
  SamplingPlan plan;
  const PLExactResult abs_res = piecewise_linear_exact(parse_function("abs(x1)", 1), plan);
  REQUIRE(abs_res.bound.points.size() == 2);
  CHECK(abs_res.bound.points[0][0] == doctest::Approx(-1.0));
  CHECK(abs_res.bound.points[1][0] == doctest::Approx(1.0));
  CHECK(abs_res.report.verdict.verdict == Verdict::kHolds);
  CHECK(*abs_res.report.L_estimate == doctest::Approx(1.0));
  CHECK(abs_res.inclusion.verdict == Verdict::kHolds);

  const PLExactResult mx = piecewise_linear_exact(parse_function("max(x1, 2*x1)", 1), plan);
  CHECK(dist_to(mx.bound, {1.0}) <= 1e-9);
  CHECK(dist_to(mx.bound, {2.0}) <= 1e-9);
  CHECK(dist_to(mx.bound, {1.5}) <= 1e-9);  // hull interior
  CHECK(*mx.report.L_estimate == doctest::Approx(2.0));

  const PLExactResult aff = piecewise_linear_exact(make_affine({2.0}, 1.0), plan);
  REQUIRE(aff.bound.points.size() == 1);
  CHECK(aff.bound.points[0][0] == doctest::Approx(2.0));

  CHECK_THROWS_AS((void)piecewise_linear_exact(parse_function("x1^2", 1), plan), Error);
}

TEST_CASE("distance subdifferential: bounded sets give the unit sphere") {
  SamplingPlan plan;
  const SetSpec origin_ball = parse_set("set { norm(x1) <= 0.0001; }", 1);
  // tiny ball around 0 in R: limiting = S^0 = {-1, 1}
  const auto [lim, sing] = distance_subdiff_at_infinity(origin_ball, plan);
  CHECK(sing.is_zero_cone());
  CHECK(lim.sphere);
  CHECK(dist_to(lim, {1.0}) <= 1e-7);
  CHECK(dist_to(lim, {-1.0}) <= 1e-7);
  CHECK(dist_to(lim, {0.0}) == doctest::Approx(1.0));
}

TEST_CASE("distance subdifferential: whole space") {
  SamplingPlan plan;
  const auto [lim, sing] = distance_subdiff_at_infinity(make_whole(2), plan);
  CHECK(sing.is_zero_cone());
  CHECK(dist_to(lim, {0.0, 0.0}) <= 1e-9);
  CHECK(lim.points.size() == 1);
}

TEST_CASE("distance subdifferential: halfspace case split") {
  SamplingPlan plan;
  const SetSpec H = parse_set("set { x1 <= 0; }", 2);
  const auto [lim, sing] = distance_subdiff_at_infinity(H, plan);
  CHECK(sing.is_zero_cone());
  // formula: (N(inf) ∩ B) u D = segment {(t,0), 0<=t<=1} u {(1,0)}
  CHECK(dist_to(lim, {1.0, 0.0}) <= 0.03);
  CHECK(dist_to(lim, {0.5, 0.0}) <= 0.03);
  CHECK(dist_to(lim, {0.0, 0.0}) <= 0.03);
  CHECK(dist_to(lim, {0.0, 1.0}) >= 0.5);  // not in the set
}
