#include <cmath>

#include <doctest.h>

#include "horizon/optimality.hpp"

using namespace horizon;

namespace {

ProblemSpec make_problem(const std::string& fn, int dim, const std::string& set_text = "",
                         double box = 20.0, double grid = 0.05) {
  ProblemSpec P{parse_function(fn, dim),
                set_text.empty() ? make_whole(dim) : parse_set(set_text, dim), SamplingPlan{},
                box, grid};
  return P;
}

}  // namespace

TEST_CASE("oracle: exp + square leaves the box") {
  const ProblemSpec P = make_problem("exp(x1) + x2^2", 2);
  const SolutionSetApprox sol = brute_force_minimize(P);
  CHECK(sol.f_star == doctest::Approx(std::exp(-20.0)).epsilon(1e-6));
  CHECK(sol.decreasing_in_M);
  CHECK_FALSE(sol.certified_compact);
}

TEST_CASE("oracle: the quadratic attains at the origin") {
  const ProblemSpec P = make_problem("x1^2 + x2^2", 2);
  const SolutionSetApprox sol = brute_force_minimize(P);
  CHECK(sol.f_star == doctest::Approx(0.0));
  REQUIRE(!sol.points.empty());
  CHECK(norm2(sol.points[0]) <= 1e-5);
  CHECK_FALSE(sol.decreasing_in_M);
  CHECK(sol.certified_compact);
}

TEST_CASE("oracle: constrained bilinear example") {
  const ProblemSpec P = make_problem("x2", 2, "set { 1 - x1^2*x2 <= 0; }");
  const SolutionSetApprox sol = brute_force_minimize(P);
  CHECK(sol.f_star == doctest::Approx(1.0 / 400.0).epsilon(0.05));
  CHECK(sol.decreasing_in_M);
}

TEST_CASE("oracle rejects empty feasible regions") {
  ProblemSpec P = make_problem("x1^2", 1, "", 20.0, 0.05);
  P.omega = parse_set("set { x1 >= 100; }", 1);
  CHECK_THROWS_AS((void)brute_force_minimize(P), Error);
}

TEST_CASE("condition at infinity: exp + square holds") {
  const ProblemSpec P = make_problem("exp(x1) + x2^2", 2);
  const Certificate c = check_condition_at_infinity(P);
  CHECK(c.verdict == Verdict::kHolds);
}

TEST_CASE("condition at infinity: bilinear constrained example holds") {
  const ProblemSpec P = make_problem("x2", 2, "set { 1 - x1^2*x2 <= 0; }");
  const Certificate c = check_condition_at_infinity(P);
  CHECK(c.verdict == Verdict::kHolds);
}

TEST_CASE("condition at infinity: the coercive quadratic fails") {
  const ProblemSpec P = make_problem("x1^2 + x2^2", 2);
  const Certificate c = check_condition_at_infinity(P);
  CHECK(c.verdict == Verdict::kFails);
}

TEST_CASE("condition at infinity flags violated assumptions") {
  // f = x1 on R: unbounded below -> (A3)
  const ProblemSpec P = make_problem("x1", 1);
  CHECK_THROWS_AS((void)check_condition_at_infinity(P), Error);
}

TEST_CASE("attainment diagnosis") {
  CHECK(diagnose_attainment(make_problem("(x1*x2 - 1)^2 + x1^2", 2)).diagnosis ==
        AttainmentDiagnosis::kConsistentUnattained);
  CHECK(diagnose_attainment(make_problem("x1^2 + x2^2", 2)).diagnosis ==
        AttainmentDiagnosis::kConsistentAttained);
}

TEST_CASE("lagrange multipliers at infinity") {
  SamplingPlan plan;
  // f = exp(x2) over {x2 <= 0}: infimum 0 unattained, multipliers vanish
  const LagrangeResult res = lagrange_at_infinity(
      parse_function("exp(x2)", 2), {parse_function("x2", 2)}, {}, plan);
  CHECK(res.cert.verdict == Verdict::kHolds);
  CHECK(res.residual <= plan.cluster_tol);

  // constraint not Lipschitz at infinity is refused
  CHECK_THROWS_AS((void)lagrange_at_infinity(parse_function("x2", 2),
                                             {parse_function("1 - x1^2*x2", 2)}, {}, plan),
                  Error);
}

TEST_CASE("coercivity certification for the quadratic") {
  const ProblemSpec P = make_problem("x1^2 + x2^2", 2);
  const CoercivityResult res = certify_coercivity(P);
  CHECK(res.cert.verdict == Verdict::kHolds);
  REQUIRE(res.weak_sharp.has_value());
  const auto [c, R] = *res.weak_sharp;
  CHECK(c == doctest::Approx(16.0).epsilon(0.10));
  CHECK(R == doctest::Approx(8.0));
  REQUIRE(!res.sol.points.empty());
  CHECK(norm2(res.sol.points[0]) <= 1e-5);
}

TEST_CASE("coercivity certification for the l1 norm") {
  const ProblemSpec P = make_problem("abs(x1) + abs(x2)", 2);
  const CoercivityResult res = certify_coercivity(P);
  CHECK(res.cert.verdict == Verdict::kHolds);
  REQUIRE(res.weak_sharp.has_value());
  CHECK(res.weak_sharp->first == doctest::Approx(1.0).epsilon(0.10));
}

TEST_CASE("coercivity requires a refuted condition") {
  const ProblemSpec P = make_problem("exp(x1) + x2^2", 2);
  CHECK_THROWS_AS((void)certify_coercivity(P), Error);
}

TEST_CASE("weak sharp inequality on oracle samples") {
  const ProblemSpec P = make_problem("x1^2 + x2^2", 2);
  const CoercivityResult res = certify_coercivity(P);
  REQUIRE(res.weak_sharp.has_value());
  const auto [c, R] = *res.weak_sharp;
  // the certified pair applies on the estimation spheres beyond R
  for (const auto& d : sphere_directions(2, 32, 0, 0)) {
    for (double r : {2 * R, 2.4 * R}) {
      const Vec x = scaled(d, r);
      double dist_sol = 1e300;
      for (const auto& p : res.sol.points) dist_sol = std::min(dist_sol, dist2(x, p));
      CHECK(evaluate(P.f, x) - res.sol.f_star >= 0.9 * c * dist_sol);
    }
  }
}

TEST_CASE("stability scan on the quadratic") {
  const ProblemSpec P = make_problem("x1^2 + x2^2", 2);
  const StabilityReport rep = stability_scan(P, {0.5, 0.25, 0.125}, 4);
  CHECK(rep.cert.verdict == Verdict::kHolds);
  REQUIRE(rep.max_dist.size() == 3);
  CHECK(rep.max_dist[0] == doctest::Approx(0.25).epsilon(0.10));
  CHECK(rep.max_dist[1] == doctest::Approx(0.125).epsilon(0.10));
  CHECK(rep.max_dist[2] == doctest::Approx(0.0625).epsilon(0.15));
  CHECK(rep.max_dist[0] >= rep.max_dist[1]);
  CHECK(rep.max_dist[1] >= rep.max_dist[2]);
}

TEST_CASE("stability scan on |x|: solutions pinned at zero") {
  const ProblemSpec P = make_problem("abs(x1)", 1);
  const StabilityReport rep = stability_scan(P, {0.5, 0.25}, 2);
  CHECK(rep.cert.verdict == Verdict::kHolds);
  for (double d : rep.max_dist) CHECK(d <= 1e-5);
}

TEST_CASE("stability requires a refuted condition") {
  const ProblemSpec P = make_problem("exp(x1) + x2^2", 2);
  CHECK_THROWS_AS((void)stability_scan(P, {0.5}, 2), Error);
}

TEST_CASE("perturbation structure of subdifferentials") {
  // subdiff(f - <u,.>) = subdiff(f) - u on supported classes
  unsigned state = 77u;
  auto next = [&] {
    state = state * 1664525u + 1013904223u;
    return 4.0 * (state / 4294967296.0) - 2.0;
  };
  const FunctionSpec f = parse_function("x1^2 + abs(x2)", 2);
  for (int i = 0; i < 100; ++i) {
    const Vec x = {next(), next()};
    const Vec u = {next(), next()};
    const FunctionSpec fu = make_tilted(f, u);
    const auto su = subdiff_at(fu, x);
    const auto s = subdiff_at(f, x);
    REQUIRE(su.values.size() == s.values.size());
    for (std::size_t k = 0; k < s.values.size(); ++k)
      CHECK(dist2(su.values[k], sub(s.values[k], u)) <= 1e-9);
  }
}

TEST_CASE("ekeland refinement") {
  // descending the exponential tail
  const Vec x1 = ekeland_refine(parse_function("exp(x1)", 1), make_whole(1), {-10.0},
                                std::exp(-10.0), 1.0);
  CHECK(x1[0] <= -10.0 + 1e-12);
  CHECK(evaluate(parse_function("exp(x1)", 1), x1) <= std::exp(-10.0) + 1e-15);

  // already minimal: fixed point
  const Vec x2 = ekeland_refine(parse_function("x1^2 + x2^2", 2), make_whole(2), {0.0, 0.0},
                                0.01, 1.0);
  CHECK(norm2(x2) <= 1e-9);

  // |x| near the kink
  const Vec x3 = ekeland_refine(parse_function("abs(x1)", 1), make_whole(1), {0.05}, 0.05, 0.1);
  CHECK(std::fabs(x3[0]) <= 0.05 + 1e-9);
  CHECK(evaluate(parse_function("abs(x1)", 1), x3) <= 0.05 + 1e-12);
}

TEST_CASE("ekeland postconditions on probes") {
  const FunctionSpec f = parse_function("x1^2", 1);
  const Vec x0 = {0.4};
  const double eps = 0.2, lambda = 0.5;
  const Vec x1 = ekeland_refine(f, make_whole(1), x0, eps, lambda);
  CHECK(evaluate(f, x1) <= evaluate(f, x0) + 1e-12);
  CHECK(dist2(x1, x0) <= lambda + 1e-9);
  unsigned state = 5u;
  for (int i = 0; i < 500; ++i) {
    state = state * 1664525u + 1013904223u;
    const double y = 16.0 * (state / 4294967296.0) - 8.0;
    CHECK(evaluate(f, x1) <= evaluate(f, {y}) + eps / lambda * std::fabs(y - x1[0]) + 1e-9);
  }
}
