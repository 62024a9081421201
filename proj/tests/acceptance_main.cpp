// Acceptance suite: one pass/fail line per criterion, nonzero exit on failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "horizon/calculus.hpp"
#include "horizon/infinity.hpp"
#include "horizon/lipschitz.hpp"
#include "horizon/optimality.hpp"

using namespace horizon;

namespace {

int g_failures = 0;

void report(int id, const std::string& label, bool pass, const std::string& detail,
            double seconds) {
  std::printf("[%s] criterion %2d: %-52s (%.1fs)%s%s\n", pass ? "PASS" : "FAIL", id,
              label.c_str(), seconds, detail.empty() ? "" : " -- ", detail.c_str());
  if (!pass) ++g_failures;
}

void run(int id, const std::string& label, const std::function<bool(std::string&)>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::string detail;
  bool pass = false;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(id, label, pass, detail, secs);
}

LimitSet cone_of(std::vector<Vec> rays) {
  LimitSet L = LimitSet::zero_cone(static_cast<int>(rays[0].size()));
  L.rays = std::move(rays);
  L.normalize();
  return L;
}

LimitSet points_of(std::vector<Vec> pts) {
  LimitSet L;
  L.dim = static_cast<int>(pts[0].size());
  L.points = std::move(pts);
  L.normalize();
  return L;
}

double frac(double v) { return v - std::floor(v); }

}  // namespace

int main() {
  SamplingPlan plan;

  run(1, "hyperbola normal cones at infinity (three index sets)", [&](std::string& why) {
    const SetSpec G = parse_set("set { graph: x2 = 1/x1; }", 2);
    struct Row {
      std::vector<int> I;
      LimitSet expect;
    };
    const std::vector<Row> rows = {
        {{1}, cone_of({{0, -1}})},
        {{2}, cone_of({{-1, 0}})},
        {{1, 2}, cone_of({{0, -1}, {-1, 0}})},
    };
    for (const auto& row : rows) {
      const auto t0 = std::chrono::steady_clock::now();
      const LimitSet got = normal_cone_at_infinity(G, IndexSet::of(row.I, 2), plan);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const double H = hausdorff_trunc(got, row.expect, 2.0);
      if (H > 0.05 || secs > 5.0) {
        std::ostringstream os;
        os << "I size " << row.I.size() << ": H=" << H << " t=" << secs;
        why = os.str();
        return false;
      }
    }
    return true;
  });

  run(2, "exponential-region normal cones at infinity", [&](std::string& why) {
    const SetSpec E = parse_set("set { x2 >= exp(x1); }", 2);
    struct Row {
      std::vector<int> I;
      LimitSet expect;
    };
    const std::vector<Row> rows = {
        {{1}, cone_of({{0, -1}, {1, 0}})},
        {{2}, cone_of({{1, 0}})},
        {{1, 2}, cone_of({{0, -1}, {1, 0}})},
    };
    for (const auto& row : rows) {
      const LimitSet got = normal_cone_at_infinity(E, IndexSet::of(row.I, 2), plan);
      const double H = hausdorff_trunc(got, row.expect, 2.0);
      if (H > 0.05) {
        std::ostringstream os;
        os << "H=" << H;
        why = os.str();
        return false;
      }
    }
    return true;
  });

  run(3, "limiting subdifferentials: shifted ray and {-1,1}", [&](std::string& why) {
    LimitSet ray;
    ray.dim = 2;
    ray.points = {{0, 1}};
    ray.rays = {{1, 0}};
    ray.affine_rays = true;
    const LimitSet cube = estimate_subdiff_at_infinity(parse_function("x1^3 + x2", 2), plan);
    const double h1 = hausdorff_trunc(cube, ray, 2.0);
    if (h1 > 0.05) {
      why = "cube H=" + std::to_string(h1);
      return false;
    }
    // exact endpoints through the piecewise-linear path
    const PLExactResult pl = piecewise_linear_exact(parse_function("abs(x1)", 1), plan);
    if (pl.direct.points.size() != 2 || std::fabs(pl.direct.points[0][0] + 1.0) > 1e-7 ||
        std::fabs(pl.direct.points[1][0] - 1.0) > 1e-7) {
      why = "abs endpoints not exact";
      return false;
    }
    return pl.inclusion.verdict == Verdict::kHolds;
  });

  run(4, "exp: both routes give ({0}, R+) and agree", [&](std::string& why) {
    const FunctionSpec f = parse_function("exp(x1)", 1);
    const InfinityEstimate direct = estimate_infinity(f, plan);
    const auto [lim, sing] = subdiff_at_infinity_via_epigraph(f, plan);
    const double h1 = hausdorff_trunc(direct.limiting, points_of({{0}}), 2.0);
    const double h2 = hausdorff_trunc(direct.singular, cone_of({{1}}), 2.0);
    const double h3 = hausdorff_trunc(direct.limiting, lim, 2.0);
    const double h4 = hausdorff_trunc(direct.singular, sing, 2.0);
    if (std::max(std::max(h1, h2), std::max(h3, h4)) > 0.05) {
      std::ostringstream os;
      os << "H=(" << h1 << "," << h2 << "," << h3 << "," << h4 << ")";
      why = os.str();
      return false;
    }
    return true;
  });

  run(5, "cube function: strict singular inclusion detected", [&](std::string& why) {
    const InfinityEstimate est = estimate_infinity(parse_function("x1^3", 1), plan);
    if (!est.pointwise_singular.is_zero_cone()) {
      why = "pointwise singular not {0}";
      return false;
    }
    const double h = hausdorff_trunc(est.singular, cone_of({{1}}), 2.0);
    if (h > 0.05) {
      why = "singular cone H=" + std::to_string(h);
      return false;
    }
    return true;  // {0} strictly inside R+
  });

  run(6, "Lipschitz biconditional on the fixture battery", [&](std::string& why) {
    struct Case {
      const char* text;
      int dim;
      bool expect;
    };
    const std::vector<Case> battery = {
        {"abs(x1)", 1, true},         {"sqrt(abs(x1) + abs(x2))", 2, true},
        {"max(x1, 2*x1)", 1, true},   {"exp(x1)", 1, false},
        {"x1^3", 1, false},           {"3*x1 - 1", 1, true},
    };
    for (const auto& c : battery) {
      const FunctionSpec f = parse_function(c.text, c.dim);
      const LipschitzReport rep = lipschitz_at_infinity(f, plan);
      const LimitSet sing = estimate_singular_at_infinity(f, plan);
      const bool verdict = rep.verdict.verdict == Verdict::kHolds;
      if (verdict != c.expect || verdict != sing.is_zero_cone()) {
        why = std::string(c.text) + ": verdict vs singular mismatch";
        return false;
      }
      if (verdict) {
        const LimitSet lim = estimate_subdiff_at_infinity(f, plan);
        if (lim.empty()) {
          why = std::string(c.text) + ": empty limiting set";
          return false;
        }
        for (const auto& p : lim.points)
          if (norm2(p) > *rep.L_estimate + 0.05) {
            why = std::string(c.text) + ": point above L";
            return false;
          }
      }
    }
    return true;
  });

  run(7, "Clarke hull of |x| is [-1, 1] with exact endpoints", [&](std::string& why) {
    const LimitSet hull = clarke_at_infinity(parse_function("abs(x1)", 1), plan);
    if (hull.points.size() != 2) {
      why = "wrong vertex count";
      return false;
    }
    if (std::fabs(hull.points[0][0] + 1.0) > 1e-7 || std::fabs(hull.points[1][0] - 1.0) > 1e-7) {
      why = "endpoints off";
      return false;
    }
    return hull.convex && dist_to(hull, {0.3}) <= 1e-9;
  });

  run(8, "chain-rule counterexample: coercivity fails, direct = {0,1}", [&](std::string& why) {
    const FunctionSpec f = parse_function("piecewise(x1 >= 0 : 0 - log(x1); x1 <= 0 : 0)", 1);
    const FunctionSpec g = parse_function("piecewise(x1 >= 0 : exp(0 - x1); x1 <= 0 : 0 - 1)", 1);
    const ChainResult res = chain_rule_at_infinity(f, {g}, plan);
    if (res.coercivity.verdict != Verdict::kFails) {
      why = "coercivity did not fail";
      return false;
    }
    const double h = hausdorff_trunc(res.direct, points_of({{0}, {1}}), 2.0);
    if (h > 0.05) {
      why = "direct H=" + std::to_string(h);
      return false;
    }
    return true;
  });

  run(9, "three unattained problems: flag set and condition holds", [&](std::string& why) {
    struct Prob {
      const char* fn;
      const char* set;
    };
    const std::vector<Prob> probs = {
        {"exp(x1) + x2^2", ""},
        {"(x1*x2 - 1)^2 + x1^2", ""},
        {"x2", "set { 1 - x1^2*x2 <= 0; }"},
    };
    for (const auto& pr : probs) {
      const auto t0 = std::chrono::steady_clock::now();
      ProblemSpec P{parse_function(pr.fn, 2),
                    *pr.set ? parse_set(pr.set, 2) : make_whole(2), plan, 20.0, 0.05};
      const SolutionSetApprox oracle = brute_force_minimize(P);
      const Certificate cond = check_condition_at_infinity(P);
      const double secs =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!oracle.decreasing_in_M) {
        why = std::string(pr.fn) + ": flag not set";
        return false;
      }
      if (cond.verdict != Verdict::kHolds) {
        why = std::string(pr.fn) + ": condition " + verdict_name(cond.verdict);
        return false;
      }
      if (secs > 30.0) {
        why = std::string(pr.fn) + ": too slow";
        return false;
      }
    }
    return true;
  });

  run(10, "coercivity and weak sharp constants", [&](std::string& why) {
    {
      ProblemSpec P{parse_function("x1^2 + x2^2", 2), make_whole(2), plan, 20.0, 0.05};
      const CoercivityResult res = certify_coercivity(P);
      if (res.cert.verdict != Verdict::kHolds || !res.weak_sharp) {
        why = "quadratic: not certified";
        return false;
      }
      if (res.sol.points.empty() || norm2(res.sol.points[0]) > 0.05) {
        why = "quadratic: Sol not at 0";
        return false;
      }
      if (std::fabs(res.weak_sharp->first - 16.0) > 0.15 * 16.0) {
        why = "quadratic: c=" + std::to_string(res.weak_sharp->first);
        return false;
      }
    }
    {
      ProblemSpec P{parse_function("abs(x1) + abs(x2)", 2), make_whole(2), plan, 20.0, 0.05};
      const CoercivityResult res = certify_coercivity(P);
      if (res.cert.verdict != Verdict::kHolds || !res.weak_sharp) {
        why = "l1: not certified";
        return false;
      }
      if (res.sol.points.empty() || norm2(res.sol.points[0]) > 0.05) {
        why = "l1: Sol not at 0";
        return false;
      }
      if (std::fabs(res.weak_sharp->first - 1.0) > 0.15) {
        why = "l1: c=" + std::to_string(res.weak_sharp->first);
        return false;
      }
    }
    return true;
  });

  run(11, "stability scan distances halve with the radius", [&](std::string& why) {
    ProblemSpec P{parse_function("x1^2 + x2^2", 2), make_whole(2), plan, 20.0, 0.05};
    const StabilityReport rep = stability_scan(P, {0.5, 0.25, 0.125}, 4);
    if (rep.cert.verdict != Verdict::kHolds) {
      why = "scan not certified";
      return false;
    }
    const std::vector<double> expect = {0.25, 0.125, 0.0625};
    for (std::size_t i = 0; i < expect.size(); ++i) {
      if (std::fabs(rep.max_dist[i] - expect[i]) > P.grid_step) {
        why = "distance " + std::to_string(rep.max_dist[i]) + " vs " + std::to_string(expect[i]);
        return false;
      }
      if (i > 0 && rep.max_dist[i] > rep.max_dist[i - 1] + 1e-9) {
        why = "not monotone";
        return false;
      }
    }
    return true;
  });

  run(12, "property suites on random structured instances", [&](std::string& why) {
    SamplingPlan quick = plan;
    quick.levels = 8;
    quick.dirs_per_level = 24;
    quick.adaptive_seeds = 2;
    // deterministic generator of structured 1-D functions
    auto instance = [&](int i) {
      const int a = 1 + static_cast<int>(std::floor(frac(i * 0.61803) * 4));
      const int b = 1 + static_cast<int>(std::floor(frac(i * 0.41421) * 3));
      const int pick = i % 5;
      std::ostringstream os;
      switch (pick) {
        case 0: os << a << "*abs(x1) + " << b << "*x1"; break;
        case 1: os << "max(" << a << "*x1, " << -b << "*x1)"; break;
        case 2: os << "min(" << a << "*x1 + 1, " << b << "*x1)"; break;
        case 3: os << a << "*x1 + " << b; break;
        default: os << "abs(" << a << "*x1 - " << b << ")"; break;
      }
      return os.str();
    };
    int checked = 0;
    for (int i = 0; i < 50; ++i) {
      const FunctionSpec f1 = parse_function(instance(i), 1);
      const FunctionSpec f2 = parse_function(instance(i + 17), 1);
      // scaling identities within 0.05
      const Certificate sc = check_scaling_identities(f1, 0.5 + frac(i * 0.218) * 2.5, quick);
      if (sc.verdict != Verdict::kHolds) {
        why = "scaling failed on instance " + std::to_string(i);
        return false;
      }
      // rule certificates never Fail under a holding qualification
      const QualificationReport q = check_sum_qualification(f1, f2, quick);
      if (q.verdict.verdict == Verdict::kHolds) {
        if (sum_rule_at_infinity(f1, f2, quick).inclusion.verdict == Verdict::kFails) {
          why = "sum rule failed on instance " + std::to_string(i);
          return false;
        }
        if (max_rule_at_infinity(f1, f2, quick).inclusion.verdict == Verdict::kFails) {
          why = "max rule failed on instance " + std::to_string(i);
          return false;
        }
      }
      if (min_rule_at_infinity(f1, f2, quick).inclusion.verdict == Verdict::kFails) {
        why = "min rule failed on instance " + std::to_string(i);
        return false;
      }
      // nonemptiness never Fails
      if (check_nonemptiness(f1, quick).verdict == Verdict::kFails) {
        why = "nonemptiness failed";
        return false;
      }
      ++checked;
    }
    // the counterexample pair fails its qualification with a witness
    const QualificationReport bad = check_sum_qualification(
        parse_function("0 - x1^2", 1), parse_function("x1^2", 1), quick);
    if (bad.verdict.verdict != Verdict::kFails || !bad.witness) {
      why = "counterexample did not fail qualification";
      return false;
    }
    // determinism: equal seeds, byte-identical dumps
    quick.seed = 3;
    const auto d1 = to_json(estimate_infinity(parse_function("abs(x1)", 1), quick), quick).dump();
    const auto d2 = to_json(estimate_infinity(parse_function("abs(x1)", 1), quick), quick).dump();
    if (d1 != d2) {
      why = "non-deterministic report";
      return false;
    }
    return checked >= 50;
  });

  run(13, "product rule strictness on the half-line pair", [&](std::string& why) {
    const SetSpec R1 = parse_set("set { x1 >= 0; }", 1);
    const ProductConeResult res =
        product_cone(R1, IndexSet::full(1), R1, IndexSet::full(1), plan);
    if (!res.product.is_zero_cone(0.05)) {
      why = "product cone not {0}";
      return false;
    }
    const double h = hausdorff_trunc(res.direct, cone_of({{0, -1}, {-1, 0}}), 2.0);
    if (h > 0.05) {
      why = "direct cone H=" + std::to_string(h);
      return false;
    }
    if (res.inclusion.verdict != Verdict::kHolds || res.inclusion.margin <= 0.05) {
      why = "strictness not reported";
      return false;
    }
    return true;
  });

  std::printf("%s: %d criterion(s) failed\n", g_failures == 0 ? "OK" : "FAILED", g_failures);
  return g_failures == 0 ? 0 : 1;
}
