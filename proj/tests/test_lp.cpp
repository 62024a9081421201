#include <cmath>
#include <functional>

#include <doctest.h>

#include "horizon/lp.hpp"

using namespace horizon;

namespace {

// Brute-force distance from x to co{points}: full simplex sweep followed by
// local grid refinement around the best coefficients; the independent oracle
// for the hull-membership margins (accurate well below 1e-6).
double hull_dist_brute(const std::vector<Vec>& pts, const Vec& x, int res = 60) {
  const int m = static_cast<int>(pts.size());
  double best = 1e300;
  Vec best_coeff(m, 0.0);
  std::vector<int> idx(m, 0);
  auto eval_coeff = [&](const Vec& coeff) {
    Vec p(x.size(), 0.0);
    for (int j = 0; j < m; ++j) axpy(coeff[j], pts[j], p);
    const double d = dist2(p, x);
    if (d < best) {
      best = d;
      best_coeff = coeff;
    }
  };
  std::function<void(int, int)> rec = [&](int i, int left) {
    if (i == m - 1) {
      idx[i] = left;
      Vec coeff(m);
      for (int j = 0; j < m; ++j) coeff[j] = static_cast<double>(idx[j]) / res;
      eval_coeff(coeff);
      return;
    }
    for (int k = 0; k <= left; ++k) {
      idx[i] = k;
      rec(i + 1, left - k);
    }
  };
  rec(0, res);
  double width = 2.0 / res;
  for (int stage = 0; stage < 3; ++stage) {
    const Vec center = best_coeff;
    const int steps = 8;
    std::vector<int> digit(m, 0);
    for (;;) {
      Vec coeff(m);
      for (int j = 0; j < m; ++j)
        coeff[j] = center[j] + width * (static_cast<double>(digit[j]) / steps - 0.5);
      eval_coeff(project_simplex(coeff));
      int j = 0;
      while (j < m && ++digit[j] > steps) digit[j++] = 0;
      if (j >= m) break;
    }
    width /= steps;
  }
  return best;
}

}  // namespace

TEST_CASE("lin_solve recovers small systems") {
  std::vector<Vec> A = {{2, 1}, {1, 3}};
  const auto x = lin_solve(A, {5, 10});
  REQUIRE(x.has_value());
  CHECK((*x)[0] == doctest::Approx(1.0));
  CHECK((*x)[1] == doctest::Approx(3.0));
  std::vector<Vec> S = {{1, 1}, {2, 2}};
  CHECK_FALSE(lin_solve(S, {1, 2}).has_value());
}

TEST_CASE("nnls clamps at zero") {
  // closest point to y in cone{(1,0)} when y points the other way
  std::vector<Vec> G = {{1, 0}};
  Vec w = nnls(G, {-2, 1});
  CHECK(w[0] == doctest::Approx(0.0));
  w = nnls(G, {3, 1});
  CHECK(w[0] == doctest::Approx(3.0));
}

TEST_CASE("convex hull distance matches the brute-force oracle") {
  const std::vector<Vec> pts = {{1, 0}, {0, 1}, {1, 1}};
  for (const Vec& x : {Vec{0, 0}, Vec{2, 2}, Vec{0.5, 0.5}, Vec{-1, 0.5}}) {
    const double fast = dist_to_convex_hull(pts, x);
    const double brute = hull_dist_brute(pts, x);
    CHECK(fast == doctest::Approx(brute).epsilon(1e-6));
  }
  // margin accuracy requirement on <= 4 generators
  const std::vector<Vec> g4 = {{1, 0}, {0, 1}, {-0.2, -0.4}, {0.7, 0.7}};
  const double fast = dist_to_convex_hull(g4, Vec{0, 0});
  CHECK(std::fabs(fast - hull_dist_brute(g4, Vec{0, 0}, 40)) <= 1e-6);
}

TEST_CASE("conic hull distance") {
  const std::vector<Vec> rays = {{1, 0}, {0, 1}};
  CHECK(dist_to_conic_hull(rays, {3, 4}) == doctest::Approx(0.0));
  CHECK(dist_to_conic_hull(rays, {-1, 0}) == doctest::Approx(1.0));
  CHECK(dist_to_conic_hull(rays, {-3, -4}) == doctest::Approx(5.0));
}

TEST_CASE("simplex solves small LPs") {
  // max x+y st x<=2, y<=3, x+y<=4, x,y>=0
  const Vec c = {1, 1};
  const std::vector<Vec> W = {{1, 0}, {0, 1}, {1, 1}};
  const Vec v = {2, 3, 4};
  const auto opt = simplex_max(c, W, v);
  REQUIRE(opt.has_value());
  CHECK(*opt == doctest::Approx(4.0));
}

TEST_CASE("recession cone detection") {
  // {x : x1 <= 0} recedes; the unit box does not
  CHECK(recession_cone_nontrivial({{1.0, 0.0}}, 2));
  std::vector<Vec> box = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  // box rows describe A d <= 0 with only d = 0
  CHECK_FALSE(recession_cone_nontrivial(box, 2));
}

TEST_CASE("two-ray least norm") {
  // p + t(1,0) with p=(-2, 1): best at t=2 -> (0,1)
  CHECK(least_norm_two_rays({-2, 1}, {1, 0}, {}, {}) == doctest::Approx(1.0));
  // both rays pull the base to the origin
  CHECK(least_norm_two_rays({-1, -1}, {1, 0}, {}, {0, 1}) == doctest::Approx(0.0));
  CHECK(least_norm_two_rays({2, 2}, {1, 0}, {}, {}) == doctest::Approx(std::sqrt(8.0)));
}
