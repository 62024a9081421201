#include <cmath>

#include <doctest.h>

#include "horizon/limit_set.hpp"

using namespace horizon;

TEST_CASE("ray and point distances") {
  LimitSet L;
  L.dim = 2;
  L.points = {{0, 1}};
  L.rays = {{1, 0}};
  L.affine_rays = true;  // denotes (0,1) + t(1,0)
  CHECK(dist_to(L, {2, 1}) == doctest::Approx(0.0));
  CHECK(dist_to(L, {-1, 1}) == doctest::Approx(1.0));
  CHECK(dist_to(L, {0, 0}) == doctest::Approx(1.0));
}

TEST_CASE("cones contain the origin and scale") {
  LimitSet C = LimitSet::zero_cone(2);
  C.rays = {{0, -1}};
  CHECK(dist_to(C, {0, 0}) == doctest::Approx(0.0));
  CHECK(dist_to(C, {0, -5}) == doctest::Approx(0.0));
  CHECK(dist_to(C, {0, 5}) == doctest::Approx(5.0));
  // scale invariance of the representation
  for (double t : {0.5, 1.0, 2.0}) {
    LimitSet S = scale_limit_set(C, t);
    CHECK(S.rays.size() == 1);
    CHECK(dist_to(S, {0, -3}) == doctest::Approx(0.0));
  }
}

TEST_CASE("empty set vs zero cone are distinct") {
  const LimitSet Z = LimitSet::zero_cone(1);
  const LimitSet E = LimitSet::empty_set(1);
  CHECK(Z.is_zero_cone());
  CHECK(E.empty());
  CHECK_FALSE(Z.empty());
  CHECK(std::isinf(dist_to(E, {0})));
  CHECK(dist_to(Z, {0}) == doctest::Approx(0.0));
}

TEST_CASE("normalization deduplicates and orders") {
  LimitSet L;
  L.dim = 1;
  L.points = {{1.0}, {1.0 + 1e-9}, {-1.0}};
  L.rays = {{2.0}};  // re-unitized
  L.normalize();
  CHECK(L.points.size() == 2);
  CHECK(L.points[0][0] == doctest::Approx(-1.0));
  CHECK(norm2(L.rays[0]) == doctest::Approx(1.0));
}

TEST_CASE("truncated Hausdorff distance") {
  LimitSet A = LimitSet::zero_cone(2);
  A.rays = {{0, -1}};
  LimitSet B = LimitSet::zero_cone(2);
  B.rays = {{0, -1}, {-1, 0}};
  CHECK(hausdorff_trunc(A, A, 2.0) == doctest::Approx(0.0));
  // B has an extra ray reaching (-2, 0): distance 2 from A
  CHECK(hausdorff_trunc(A, B, 2.0) == doctest::Approx(2.0).epsilon(0.02));
  CHECK(subset_within(A, B, 2.0, 0.05));
  CHECK_FALSE(subset_within(B, A, 2.0, 0.05));
}

TEST_CASE("closedness under small perturbations of members") {
  LimitSet C = LimitSet::zero_cone(2);
  C.rays = {{1, 0}};
  // points converging to a member stay near the set
  for (double eps : {0.01, 0.005, 0.001}) {
    CHECK(dist_to(C, {1.0, eps}) <= eps + 1e-12);
  }
}

TEST_CASE("minkowski sum combines points and rays") {
  LimitSet A;
  A.dim = 1;
  A.points = {{-1}, {1}};
  LimitSet B;
  B.dim = 1;
  B.points = {{2}};
  const LimitSet S = minkowski_sum(A, B);
  REQUIRE(S.points.size() == 2);
  CHECK(S.points[0][0] == doctest::Approx(1.0));
  CHECK(S.points[1][0] == doctest::Approx(3.0));
  // empty operand absorbs
  CHECK(minkowski_sum(A, LimitSet::empty_set(1)).empty());
}

TEST_CASE("minkowski monotonicity: adding a ray never shrinks the sum") {
  LimitSet A;
  A.dim = 2;
  A.points = {{1, 0}};
  LimitSet B;
  B.dim = 2;
  B.points = {{0, 1}};
  const LimitSet S0 = minkowski_sum(A, B);
  LimitSet A2 = A;
  A2.rays = {{0, 1}};
  A2.affine_rays = true;
  const LimitSet S1 = minkowski_sum(A2, B);
  for (const auto& s : sample_within(S0, 2.0, 0.1))
    CHECK(dist_to(S1, s) <= 1e-7);
}

TEST_CASE("dist_to_sum enumerates union semantics exactly") {
  LimitSet A;
  A.dim = 2;
  A.points = {{0, 1}};
  A.rays = {{1, 0}};
  A.affine_rays = true;  // (0,1) + t(1,0)
  LimitSet B = LimitSet::zero_cone(2);
  B.rays = {{0, -1}};
  // 0 = (0,1) + 0*(1,0) + (0,-1): distance 0
  CHECK(dist_to_sum(A, B, {0, 0}) == doctest::Approx(0.0).epsilon(1e-9));
  // (-1, 0): best is (0,1)+(0,-1) -> (0,0), distance 1
  CHECK(dist_to_sum(A, B, {-1, 0}) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::isinf(dist_to_sum(LimitSet::empty_set(2), B, {0, 0})));
}

TEST_CASE("json round trip") {
  LimitSet L;
  L.dim = 2;
  L.points = {{0, 1}};
  L.rays = {{1, 0}};
  L.affine_rays = true;
  L.trunc_radius = 2.0;
  const auto j = to_json(L);
  CHECK(j.contains("points"));
  CHECK(j.contains("rays"));
  CHECK(j.contains("is_cone"));
  CHECK(j.contains("trunc_radius"));
  const LimitSet back = limit_set_from_json(j);
  CHECK(hausdorff_trunc(L, back, 2.0) == doctest::Approx(0.0));
}

TEST_CASE("sphere directions include the axes and are deterministic") {
  const auto d1 = sphere_directions(2, 16, 7, 3);
  const auto d2 = sphere_directions(2, 16, 7, 3);
  REQUIRE(d1.size() == d2.size());
  for (std::size_t i = 0; i < d1.size(); ++i) CHECK(dist2(d1[i], d2[i]) == 0.0);
  bool has_e1 = false;
  for (const auto& d : d1)
    if (dist2(d, {1, 0}) == 0.0) has_e1 = true;
  CHECK(has_e1);
  for (const auto& d : d1) CHECK(norm2(d) == doctest::Approx(1.0));
}

TEST_CASE("recurrence tracker accepts only persistent representatives") {
  RecurrenceTracker t(0.05, false);
  for (int lvl = 0; lvl < 5; ++lvl) t.add(lvl, {1, 0});
  t.add(4, {0, 1});  // appears only at the last level
  const auto acc = t.accepted(4, 3);
  REQUIRE(acc.size() == 1);
  CHECK(dist2(acc[0], {1, 0}) <= 1e-9);
}
