#include <cmath>

#include <doctest.h>

#include "horizon/pointwise.hpp"

using namespace horizon;

namespace {

double frac(double v) { return v - std::floor(v); }

Vec rnd_point(int dim, int i, double scale) {
  Vec x(dim);
  for (int j = 0; j < dim; ++j)
    x[j] = scale * (2.0 * frac(0.5 + (i + 1) * frac(std::sqrt(3.0 + j) * 0.7548776662)) - 1.0);
  return x;
}

}  // namespace

TEST_CASE("subdiff of abs at the kink") {
  const FunctionSpec f = parse_function("abs(x1)", 1);
  const SubgradientSample s = subdiff_at(f, {0});
  REQUIRE(s.values.size() == 2);
  CHECK(s.values[0][0] == doctest::Approx(-1.0));
  CHECK(s.values[1][0] == doctest::Approx(1.0));
  CHECK(s.convex_hull);  // interval [-1, 1]
}

TEST_CASE("subdiff of smooth functions is the gradient") {
  const FunctionSpec f = parse_function("x1^3 + x2", 2);
  const SubgradientSample s = subdiff_at(f, {2, 1});
  REQUIRE(s.values.size() == 1);
  CHECK(dist2(s.values[0], {12, 1}) <= 1e-9);
}

TEST_CASE("subdiff of an indicator is the normal cone") {
  const FunctionSpec d = parse_function("indicator(set { graph: x2 = 1/x1; })", 2);
  const SubgradientSample s = subdiff_at(d, {1, 1});
  REQUIRE(s.cone_rays.size() == 1);
  const double inv = 1.0 / std::sqrt(2.0);
  CHECK(dist2(s.cone_rays[0], {-inv, -inv}) <= 1e-7);
  for (const auto& v : s.values) CHECK(norm2(v) <= 1e-9);  // only the zero element
}

TEST_CASE("Lemma 2.7 identity on a polyhedral set") {
  const SetSpec P = parse_set("set { x1 + x2 <= 1; x1 - x2 <= 1; }", 2);
  auto Pp = std::make_shared<const SetSpec>(P);
  const FunctionSpec d = make_indicator(Pp);
  // 50 boundary points of the first facet
  for (int i = 0; i < 50; ++i) {
    const double t = -2.0 + 4.0 * i / 49.0;
    const Vec x = {0.5 * (1 + t) - 0.5 * (t - 1) * 0 + (t - 1) * 0.0, 0.0};
    Vec bx = {1 - 0.0, 0.0};
    // walk along the facet x1 + x2 = 1 instead (x = (1-s, s) with s <= 0 keeps both rows)
    const double s = -std::fabs(t);
    bx = {1 - s, s};
    if (!set_contains(P, bx)) continue;
    const SubgradientSample sample = subdiff_at(d, bx);
    const LimitSet N = normal_cone_at(P, bx);
    REQUIRE(sample.cone_rays.size() == N.rays.size());
    for (std::size_t k = 0; k < N.rays.size(); ++k)
      CHECK(dist2(sample.cone_rays[k], N.rays[k]) <= 1e-9);
  }
}

TEST_CASE("Frechet inclusion: smooth subdiff equals gradient on random points") {
  const FunctionSpec f = parse_function("exp(x1) + x2^2", 2);
  for (int i = 0; i < 100; ++i) {
    const Vec x = rnd_point(2, i, 3.0);
    const SubgradientSample s = subdiff_at(f, x);
    REQUIRE(s.values.size() == 1);
    CHECK(dist2(s.values[0], gradient_exact(f, x)) <= 1e-10);
  }
}

TEST_CASE("singular subdifferentials") {
  CHECK(singular_subdiff_at(parse_function("abs(x1)", 1), {0}).is_zero_cone());
  CHECK(singular_subdiff_at(parse_function("x1^3", 1), {1}).is_zero_cone());

  const FunctionSpec d = parse_function("indicator(set { x1 >= 0; })", 1);
  const LimitSet N = singular_subdiff_at(d, {0});
  REQUIRE(N.rays.size() == 1);
  CHECK(N.rays[0][0] == doctest::Approx(-1.0));
}

TEST_CASE("pointwise sum rule") {
  const FunctionSpec sq = parse_function("x1^2", 1);
  const FunctionSpec ab = parse_function("abs(x1)", 1);
  const SubgradientSample s = pointwise_sum_rule(sq, ab, {0});
  REQUIRE(s.values.size() == 2);
  CHECK(s.values[0][0] == doctest::Approx(-1.0));
  CHECK(s.values[1][0] == doctest::Approx(1.0));

  const FunctionSpec a1 = make_affine({2.0}, 0.0);
  const FunctionSpec a2 = make_affine({3.0}, 0.0);
  const SubgradientSample lin = pointwise_sum_rule(a1, a2, {1});
  REQUIRE(lin.values.size() == 1);
  CHECK(lin.values[0][0] == doctest::Approx(5.0));

  // abs + indicator of the half-line at the origin: (-inf, 1]
  const FunctionSpec dpos = parse_function("indicator(set { x1 >= 0; })", 1);
  const SubgradientSample mixed = pointwise_sum_rule(ab, dpos, {0});
  const LimitSet L = sample_to_limit_set(mixed, 1);
  CHECK(dist_to(L, {1.0}) <= 1e-7);
  CHECK(dist_to(L, {-3.0}) <= 1e-6);   // via the cone ray
  CHECK(dist_to(L, {2.0}) >= 0.5);     // not inside

  // both non-Lipschitz summands are rejected
  CHECK_THROWS_AS((void)pointwise_sum_rule(dpos, dpos, {0}), Error);
}

TEST_CASE("epigraph consistency of returned subgradients") {
  const std::vector<std::pair<std::string, Vec>> cases = {
      {"abs(x1)", {0.0}}, {"x1^2", {1.0}}, {"max(x1, 2*x1)", {0.0}}};
  for (const auto& [text, x] : cases) {
    const FunctionSpec f = parse_function(text, 1);
    const SubgradientSample s = subdiff_at(f, x);
    const LimitSet N = epigraph_normal_cone_sampled(f, x);
    for (const auto& u : s.values) {
      Vec dir = u;
      dir.push_back(-1.0);
      dir = normalized(dir);
      double best = 1e300;
      for (const auto& r : N.rays) best = std::min(best, chord_dist(r, dir));
      CHECK(best <= 0.05);
    }
  }
}
