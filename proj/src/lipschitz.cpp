#include <algorithm>
#include <cmath>
#include <sstream>

#include "horizon/lipschitz.hpp"
#include "horizon/lp.hpp"

namespace horizon {
namespace {

// Max finite subgradient norm over the sample battery of the last m levels.
double max_value_norm(const FunctionSpec& f, const SamplingPlan& plan) {
  double mx = 0.0;
  for (int level = plan.levels - plan.window; level < plan.levels; ++level) {
    for (const auto& x : subdiff_sample_points(f, plan, level)) {
      if (!in_domain(f, x)) continue;
      try {
        const SubgradientSample s = subdiff_at(f, x);
        for (const auto& u : s.values)
          if (all_finite(u)) mx = std::max(mx, norm2(u));
      } catch (const Error&) {
        continue;
      }
    }
  }
  return mx;
}

bool finite_on_sampled_region(const FunctionSpec& f, const SamplingPlan& plan,
                              Vec* witness) {
  for (int level = plan.levels - 2; level < plan.levels; ++level) {
    const double r = plan.radius(level);
    for (const auto& d : sphere_directions(f.dim, plan.dirs_per_level, plan.seed, level)) {
      const Vec x = scaled(d, r);
      const double v = evaluate(f, x);
      if (!std::isfinite(v) && r < 700.0) {  // overflow radii are not domain evidence
        if (witness) *witness = x;
        return false;
      }
    }
  }
  // also check moderate radii: Lipschitz at infinity needs finiteness off a ball
  for (double r : {8.0, 32.0}) {
    for (const auto& d : sphere_directions(f.dim, 16, plan.seed, 0)) {
      const Vec x = scaled(d, r);
      if (!std::isfinite(evaluate(f, x))) {
        if (witness) *witness = x;
        return false;
      }
    }
  }
  return true;
}

}  // namespace

LipschitzReport lipschitz_at_infinity(const FunctionSpec& f, const SamplingPlan& plan) {
  plan.validate();
  LipschitzReport rep;
  Vec witness;
  if (!finite_on_sampled_region(f, plan, &witness)) {
    rep.verdict.verdict = Verdict::kFails;
    rep.verdict.margin = 1.0;
    rep.verdict.witnesses.push_back(witness);
    rep.verdict.trace.push_back("extended-valued on the sampled region");
    return rep;
  }
  const InfinityEstimate est = estimate_infinity(f, plan);
  rep.R_estimate = plan.radius(plan.levels - plan.window);
  if (!est.singular.is_zero_cone()) {
    rep.verdict.verdict = Verdict::kFails;
    rep.verdict.margin = 1.0;
    for (const auto& r : est.singular.rays) rep.verdict.witnesses.push_back(r);
    rep.verdict.trace.push_back("persistent singular ray at infinity");
    return rep;
  }
  const double L = max_value_norm(f, plan);
  // cross-validate with pairwise difference quotients outside R_estimate
  int checked = 0;
  double worst = 0.0;
  for (int level = plan.levels - 2; level < plan.levels && checked < 200; ++level) {
    const double r = plan.radius(level);
    const auto dirs = sphere_directions(f.dim, plan.dirs_per_level, plan.seed, level);
    for (std::size_t i = 0; i + 1 < dirs.size() && checked < 200; ++i) {
      for (const Vec& y : {scaled(dirs[i + 1], r * 1.01), scaled(dirs[i], r * 1.37)}) {
        const Vec x = scaled(dirs[i], r);
        // nearby pairs only: distant ones may straddle disconnected exterior
        // components where the subgradient bound says nothing about quotients
        if (dist2(x, y) > 0.6 * r) continue;
        const double fx = evaluate(f, x), fy = evaluate(f, y);
        if (!std::isfinite(fx) || !std::isfinite(fy)) continue;
        const double q = std::fabs(fx - fy) / std::max(dist2(x, y), 1e-12);
        worst = std::max(worst, q);
        ++checked;
      }
    }
  }
  std::ostringstream tr;
  tr << "L=" << L << " worst sampled quotient=" << worst << " over " << checked << " pairs";
  rep.verdict.trace.push_back(tr.str());
  if (worst > std::max(L, 1e-9) * 1.02 + 1e-9) {
    rep.verdict.verdict = Verdict::kInconclusive;
    rep.verdict.trace.push_back("difference quotients exceed the subgradient bound");
    return rep;
  }
  rep.verdict.verdict = Verdict::kHolds;
  rep.verdict.margin = 1.0;
  rep.L_estimate = L;
  rep.clarke_hull = convex_hull_of(est.limiting);
  return rep;
}

LimitSet clarke_at_infinity(const FunctionSpec& f, const SamplingPlan& plan) {
  const LipschitzReport rep = lipschitz_at_infinity(f, plan);
  if (rep.verdict.verdict != Verdict::kHolds)
    fail(Errc::not_lipschitz_at_infinity,
         "the Clarke hull identity needs Lipschitz continuity at infinity");
  return *rep.clarke_hull;
}

PLExactResult piecewise_linear_exact(const FunctionSpec& f, const SamplingPlan& plan) {
  if (!f.pl_pieces)
    fail(Errc::not_piecewise_linear, "function has no piecewise-linear decomposition");
  PLExactResult out;
  out.bound.dim = f.dim;
  out.bound.convex = true;
  out.bound.trunc_radius = plan.trunc_radius;
  double L = 0.0;
  for (const auto& piece : *f.pl_pieces) {
    std::vector<Vec> rows;
    for (const auto& ineq : piece.domain) rows.push_back(ineq.a);
    const bool unbounded = piece.domain.empty() || recession_cone_nontrivial(rows, f.dim);
    if (!unbounded) continue;
    out.bound.points.push_back(piece.a);
    L = std::max(L, norm2(piece.a));
  }
  out.bound.normalize();
  if (out.bound.points.empty())
    fail(Errc::not_piecewise_linear, "no unbounded piece; domain bounded");

  out.report.verdict.verdict = Verdict::kHolds;
  out.report.verdict.margin = 1.0;
  out.report.L_estimate = L;
  out.report.clarke_hull = out.bound;
  // smallest probe radius where only unbounded-piece slopes are active
  double R = 1.0;
  for (; R <= 1024.0; R *= 2) {
    bool clean = true;
    for (const auto& d : sphere_directions(f.dim, 32, 0, 0)) {
      const GradResult g = try_gradient(f, scaled(d, R * 1.5));
      if (!g.in_domain) continue;
      bool matches = false;
      for (const auto& p : out.bound.points)
        if (dist2(g.grad, p) <= 1e-7) matches = true;
      if (!matches) clean = false;
    }
    if (clean) break;
  }
  out.report.R_estimate = R;

  out.direct = estimate_subdiff_at_infinity(f, plan);
  Vec witness;
  const bool ok = subset_within(out.direct, out.bound, plan.trunc_radius, 0.05, &witness);
  out.inclusion.verdict = ok ? Verdict::kHolds : Verdict::kFails;
  out.inclusion.margin = 0.05;
  if (!ok) out.inclusion.witnesses.push_back(witness);
  return out;
}

std::pair<LimitSet, LimitSet> distance_subdiff_at_infinity(const SetSpec& S,
                                                           const SamplingPlan& plan) {
  plan.validate();
  LimitSet singular = LimitSet::zero_cone(S.dim);  // d is globally 1-Lipschitz
  singular.trunc_radius = plan.trunc_radius;

  LimitSet limiting;
  limiting.dim = S.dim;
  limiting.trunc_radius = plan.trunc_radius;

  if (set_bounded_probe(S)) {
    limiting.sphere = true;  // the whole unit sphere, stored symbolically
    return {limiting, singular};
  }

  // (N(inf) ∩ B) u D: segments toward accepted cone rays plus stable offsets.
  const IndexSet I = IndexSet::full(S.dim);
  const LimitSet N = normal_cone_at_infinity(S, I, plan);
  limiting.points.push_back(zeros(S.dim));
  for (const auto& ray : N.rays)
    for (double t = 0.05; t <= 1.0 + 1e-12; t += 0.05) limiting.points.push_back(scaled(ray, t));

  // D = Limsup of (x - proj(x)) / d(x) over escaping off-set samples (no
  // distance cap here: far samples are exactly the interesting ones).
  RecurrenceTracker offsets(plan.cluster_tol, false);
  for (int level = 0; level < plan.levels; ++level) {
    const double r = plan.radius(level);
    for (const auto& d : sphere_directions(S.dim, plan.dirs_per_level, plan.seed, level)) {
      const Vec x = scaled(d, r);
      if (set_contains(S, x)) continue;
      std::vector<Vec> ys;
      try {
        ys = project(S, x);
      } catch (const Error&) {
        continue;
      }
      for (const auto& y : ys) {
        const double dd = dist2(x, y);
        if (dd <= 1e-9 * (1.0 + r)) continue;
        offsets.add(level, normalized(sub(x, y)));
      }
    }
  }
  for (const auto& u : offsets.accepted(plan.levels - 1, plan.window))
    limiting.points.push_back(u);
  limiting.normalize();
  return {limiting, singular};
}

nlohmann::json to_json(const LipschitzReport& r) {
  nlohmann::json j;
  j["verdict"] = to_json(r.verdict);
  if (r.L_estimate) j["L_estimate"] = *r.L_estimate;
  j["R_estimate"] = r.R_estimate;
  if (r.clarke_hull) j["clarke_hull"] = to_json(*r.clarke_hull);
  return j;
}

}  // namespace horizon
