#include <algorithm>
#include <cmath>
#include <sstream>

#include "horizon/calculus.hpp"
#include "horizon/lp.hpp"

namespace horizon {
namespace {

Certificate inclusion_certificate(const LimitSet& direct, const LimitSet& bound, double T) {
  Certificate cert;
  if (direct.empty() && !direct.is_cone) {
    cert.verdict = Verdict::kHolds;  // empty set is contained in anything
    cert.margin = 1.0;
    cert.trace.push_back("direct estimate empty");
    return cert;
  }
  double worst = 0.0;
  Vec witness;
  for (const auto& s : sample_within(direct, T, 0.025)) {
    const double d = dist_to(bound, s);
    if (d > worst) {
      worst = d;
      witness = s;
    }
  }
  cert.margin = worst;
  if (worst <= 0.05) {
    cert.verdict = Verdict::kHolds;
  } else if (worst >= 0.25) {
    cert.verdict = Verdict::kFails;
    cert.witnesses.push_back(witness);
  } else {
    cert.verdict = Verdict::kInconclusive;
    cert.witnesses.push_back(witness);
  }
  std::ostringstream tr;
  tr << "largest distance from direct estimate to the bound: " << worst;
  cert.trace.push_back(tr.str());
  return cert;
}

}  // namespace

const char* qual_kind_name(QualKind k) {
  switch (k) {
    case QualKind::kSingularSum: return "SingularSum";
    case QualKind::kNormalIntersection: return "NormalIntersection";
    case QualKind::kChainCoercive: return "ChainCoercive";
    case QualKind::kConstraintAtInfinity: return "ConstraintAtInfinity";
  }
  return "?";
}

QualificationReport check_sum_qualification(const FunctionSpec& f1, const FunctionSpec& f2,
                                            const SamplingPlan& plan) {
  QualificationReport rep;
  rep.kind = QualKind::kSingularSum;
  const LimitSet s1 = estimate_singular_at_infinity(f1, plan);
  const LimitSet s2 = estimate_singular_at_infinity(f2, plan);
  rep.verdict.verdict = Verdict::kHolds;
  rep.verdict.margin = 2.0;
  for (const auto& r1 : s1.rays)
    for (const auto& r2 : s2.rays) {
      const double c = chord_dist(r1, scaled(r2, -1.0));
      rep.verdict.margin = std::min(rep.verdict.margin, c);
      if (c <= 2 * plan.cluster_tol) {
        rep.verdict.verdict = Verdict::kFails;
        rep.witness = r1;
        rep.verdict.witnesses.push_back(r1);
      }
    }
  std::ostringstream tr;
  tr << "singular cones carry " << s1.rays.size() << " and " << s2.rays.size()
     << " rays; min opposing chord " << rep.verdict.margin;
  rep.verdict.trace.push_back(tr.str());
  return rep;
}

RuleResult sum_rule_at_infinity(const FunctionSpec& f1, const FunctionSpec& f2,
                                const SamplingPlan& plan) {
  const QualificationReport qual = check_sum_qualification(f1, f2, plan);
  if (qual.verdict.verdict != Verdict::kHolds)
    fail(Errc::qualification_failed, "singular-sum qualification does not hold");
  RuleResult out;
  const LimitSet a = estimate_subdiff_at_infinity(f1, plan);
  const LimitSet b = estimate_subdiff_at_infinity(f2, plan);
  out.bound = minkowski_sum(a, b);
  out.direct = estimate_subdiff_at_infinity(make_sum(f1, f2), plan);
  out.inclusion = inclusion_certificate(out.direct, out.bound, plan.trunc_radius);
  return out;
}

LimitSet lambda_compose(double lambda, const LimitSet& limiting, const LimitSet& singular) {
  if (lambda == 0.0) return singular;
  return scale_limit_set(limiting, lambda);
}

RuleResult max_rule_at_infinity(const FunctionSpec& f1, const FunctionSpec& f2,
                                const SamplingPlan& plan) {
  const QualificationReport qual = check_sum_qualification(f1, f2, plan);
  if (qual.verdict.verdict != Verdict::kHolds)
    fail(Errc::qualification_failed, "singular-sum qualification does not hold");
  RuleResult out;
  const InfinityEstimate e1 = estimate_infinity(f1, plan);
  const InfinityEstimate e2 = estimate_infinity(f2, plan);
  LimitSet bound = LimitSet::empty_set(f1.dim);
  bound.trunc_radius = plan.trunc_radius;
  for (int k = 0; k <= 10; ++k) {
    const double l1 = k / 10.0;
    const double l2 = 1.0 - l1;
    const LimitSet term = minkowski_sum(lambda_compose(l1, e1.limiting, e1.singular),
                                        lambda_compose(l2, e2.limiting, e2.singular));
    bound = union_limit_sets(bound, term);
  }
  out.bound = bound;
  out.direct = estimate_subdiff_at_infinity(make_max(f1, f2), plan);
  out.inclusion = inclusion_certificate(out.direct, out.bound, plan.trunc_radius);
  return out;
}

RuleResult min_rule_at_infinity(const FunctionSpec& f1, const FunctionSpec& f2,
                                const SamplingPlan& plan) {
  RuleResult out;
  const LimitSet a = estimate_subdiff_at_infinity(f1, plan);
  const LimitSet b = estimate_subdiff_at_infinity(f2, plan);
  out.bound = union_limit_sets(a, b);
  out.direct = estimate_subdiff_at_infinity(make_min(f1, f2), plan);
  out.inclusion = inclusion_certificate(out.direct, out.bound, plan.trunc_radius);
  return out;
}

Certificate partial_subdiff_check(const FunctionSpec& phi, int n, const Vec& ybar,
                                  const SamplingPlan& plan) {
  const int m = phi.dim - n;
  if (m <= 0 || static_cast<int>(ybar.size()) != m)
    fail(Errc::dimension_mismatch, "partial check: ybar must fill the trailing coordinates");
  const InfinityEstimate joint = estimate_infinity(phi, plan);
  Certificate cert;
  // Precondition: (0, v) in singular cone forces v = 0.
  for (const auto& ray : joint.singular.rays) {
    Vec head(ray.begin(), ray.begin() + n);
    Vec tail(ray.begin() + n, ray.end());
    if (norm2(head) <= plan.cluster_tol && norm2(tail) > plan.cluster_tol) {
      cert.verdict = Verdict::kInconclusive;
      cert.witnesses.push_back(ray);
      cert.trace.push_back("singular cone has a (0, v) ray; the inclusion is not licensed");
      return cert;
    }
  }
  const FunctionSpec restricted = make_restriction(phi, n, ybar);
  const InfinityEstimate part = estimate_infinity(restricted, plan);

  auto project_head = [&](const LimitSet& L) {
    LimitSet P;
    P.dim = n;
    P.trunc_radius = L.trunc_radius;
    P.is_cone = L.is_cone;
    P.affine_rays = L.affine_rays;
    for (const auto& p : L.points) P.points.push_back(Vec(p.begin(), p.begin() + n));
    for (const auto& r : L.rays) {
      Vec head(r.begin(), r.begin() + n);
      if (norm2(head) > 1e-6)
        P.rays.push_back(normalized(head));
      else
        P.points.push_back(zeros(n));
    }
    P.normalize();
    return P;
  };
  const LimitSet proj_lim = project_head(joint.limiting);
  const LimitSet proj_sing = project_head(joint.singular);

  Vec witness;
  const bool ok1 = part.limiting.empty() ||
                   subset_within(part.limiting, proj_lim, plan.trunc_radius, 0.05, &witness);
  const bool ok2 =
      subset_within(part.singular, proj_sing, plan.trunc_radius, 0.05, &witness);
  cert.verdict = (ok1 && ok2) ? Verdict::kHolds : Verdict::kFails;
  cert.margin = 0.05;
  if (!ok1 || !ok2) cert.witnesses.push_back(witness);
  cert.trace.push_back(ok1 ? "limiting inclusion verified on samples"
                           : "limiting inclusion violated");
  cert.trace.push_back(ok2 ? "singular inclusion verified on samples"
                           : "singular inclusion violated");
  return cert;
}

ChainResult chain_rule_at_infinity(const FunctionSpec& f, const std::vector<FunctionSpec>& g,
                                   const SamplingPlan& plan) {
  if (static_cast<int>(g.size()) != f.dim)
    fail(Errc::dimension_mismatch, "chain rule needs one inner function per outer coordinate");
  ChainResult out;
  const int m = g[0].dim;

  for (const auto& gi : g) {
    const LipschitzReport rep = lipschitz_at_infinity(gi, plan);
    if (rep.verdict.verdict != Verdict::kHolds)
      fail(Errc::not_lipschitz_at_infinity, "every inner function must be Lipschitz at infinity");
  }

  // direct estimate of the composition is always reported
  out.direct = estimate_subdiff_at_infinity(make_compose(f, g), plan);

  // sampled coercivity of g at the outermost two levels
  double min_prev = kPlusInf, min_last = kPlusInf;
  for (int level = plan.levels - 2; level < plan.levels; ++level) {
    const double r = plan.radius(level);
    double lv = kPlusInf;
    for (const auto& d : sphere_directions(m, plan.dirs_per_level, plan.seed, level)) {
      Vec gx(g.size());
      bool ok = true;
      for (std::size_t i = 0; i < g.size(); ++i) {
        gx[i] = evaluate(g[i], scaled(d, r));
        if (!std::isfinite(gx[i])) ok = false;
      }
      if (ok) lv = std::min(lv, norm2(gx));
    }
    (level == plan.levels - 2 ? min_prev : min_last) = lv;
  }
  const double need = plan.divergence_tau * plan.r0;
  std::ostringstream tr;
  tr << "min |g| over the last two spheres: " << min_prev << ", " << min_last
     << " (threshold " << need << ")";
  out.coercivity.trace.push_back(tr.str());
  if (min_last >= need && min_last >= min_prev * 0.99) {
    out.coercivity.verdict = Verdict::kHolds;
    out.coercivity.margin = min_last / need;
  } else {
    out.coercivity.verdict = Verdict::kFails;
    out.coercivity.margin = need - std::min(min_last, need);
    out.inclusion.verdict = Verdict::kInconclusive;
    out.inclusion.trace.push_back("coercivity failed; bound not licensed");
    return out;
  }

  // estimates of ±g_i
  std::vector<InfinityEstimate> pos(g.size()), neg(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    pos[i] = estimate_infinity(g[i], plan);
    neg[i] = estimate_infinity(make_scaled(g[i], -1.0), plan);
  }
  const InfinityEstimate ef = estimate_infinity(f, plan);

  auto term_for = [&](const Vec& u) {
    LimitSet acc = LimitSet::zero_cone(m);
    acc.points.push_back(zeros(m));
    acc.is_cone = false;
    bool first = true;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (std::fabs(u[i]) < 1e-12) continue;
      const LimitSet& base = u[i] > 0 ? pos[i].limiting : neg[i].limiting;
      const LimitSet scaled_set = scale_limit_set(base, std::fabs(u[i]));
      acc = first ? scaled_set : minkowski_sum(acc, scaled_set);
      first = false;
    }
    if (first) {
      LimitSet zero;
      zero.dim = m;
      zero.points.push_back(zeros(m));
      return zero;
    }
    return acc;
  };

  // chain qualification: u in singular cone with 0 in the matched sum
  out.qualification.verdict = Verdict::kHolds;
  out.qualification.margin = kPlusInf;
  for (const auto& u : ef.singular.rays) {
    const LimitSet term = term_for(u);
    const double d = dist_to(term, zeros(m));
    out.qualification.margin = std::min(out.qualification.margin, d);
    if (d <= plan.cluster_tol) {
      out.qualification.verdict = Verdict::kFails;
      out.qualification.witnesses.push_back(u);
    }
  }
  if (out.qualification.verdict != Verdict::kHolds)
    fail(Errc::qualification_failed, "chain qualification fails on the singular estimate");

  // union bound over representatives of est f
  LimitSet bound = LimitSet::empty_set(m);
  bound.trunc_radius = plan.trunc_radius;
  std::vector<Vec> reps = ef.limiting.points;
  for (const auto& ray : ef.limiting.rays) {
    const std::vector<Vec> bases =
        ef.limiting.affine_rays && !ef.limiting.points.empty() ? ef.limiting.points
                                                               : std::vector<Vec>{zeros(f.dim)};
    for (const auto& b : bases)
      for (double t : {0.5, 1.0, 2.0}) reps.push_back(add(b, scaled(ray, t)));
  }
  for (const auto& u : reps) bound = union_limit_sets(bound, term_for(u));
  out.bound = bound;

  LimitSet sbound = LimitSet::zero_cone(m);
  for (const auto& u : ef.singular.rays)
    for (double t : {0.5, 1.0, 2.0}) sbound = union_limit_sets(sbound, term_for(scaled(u, t)));
  sbound.is_cone = true;
  out.singular_bound = sbound;

  out.inclusion = inclusion_certificate(out.direct, out.bound, plan.trunc_radius);
  return out;
}

ConstraintConeResult constraint_cone_bound(const std::vector<FunctionSpec>& g,
                                           const std::vector<FunctionSpec>& h,
                                           const SamplingPlan& plan) {
  if (g.empty() && h.empty()) fail(Errc::semantic_error, "no constraints given");
  const int n = g.empty() ? h[0].dim : g[0].dim;
  ConstraintConeResult out;
  out.report.kind = QualKind::kConstraintAtInfinity;

  for (const auto& fn : g)
    if (lipschitz_at_infinity(fn, plan).verdict.verdict != Verdict::kHolds)
      fail(Errc::not_lipschitz_at_infinity, "inequality constraint not Lipschitz at infinity");
  for (const auto& fn : h)
    if (lipschitz_at_infinity(fn, plan).verdict.verdict != Verdict::kHolds)
      fail(Errc::not_lipschitz_at_infinity, "equality constraint not Lipschitz at infinity");

  const SetSpec omega = make_constraint_system(g, h);
  if (!find_feasible_point(omega) || !set_projected_unbounded(omega))
    fail(Errc::empty_or_bounded_constraint_set, "constraint set must be nonempty and unbounded");

  // generators: subgradient estimates of g_i and ±h_j (compact by Lipschitzness)
  auto harvest = [&](const FunctionSpec& fn) {
    const LimitSet L = estimate_subdiff_at_infinity(fn, plan);
    for (const auto& p : L.points) out.generators.push_back(p);
    for (const auto& r : L.rays) out.generators.push_back(scaled(r, plan.trunc_radius));
  };
  for (const auto& fn : g) harvest(fn);
  for (const auto& fn : h) {
    harvest(fn);
    harvest(make_scaled(fn, -1.0));
  }
  std::sort(out.generators.begin(), out.generators.end(), lex_less);

  const double margin = dist_to_convex_hull(out.generators, zeros(n));
  out.report.verdict.margin = margin;
  std::ostringstream tr;
  tr << "dist(0, co{generators}) = " << margin;
  out.report.verdict.trace.push_back(tr.str());
  if (margin <= 1e-6) {
    out.report.verdict.verdict = Verdict::kFails;
    // witness: the hull coefficients realizing 0 (recorded via the generators)
    Vec coeffs;
    dist_to_convex_hull(out.generators, zeros(n), &coeffs);
    out.report.witness = coeffs;
    out.report.verdict.witnesses.push_back(coeffs);
    return out;
  }
  out.report.verdict.verdict = Verdict::kHolds;

  out.bound.dim = n;
  out.bound.is_cone = true;
  out.bound.convex = true;
  out.bound.trunc_radius = plan.trunc_radius;
  for (const auto& gen : out.generators)
    if (norm2(gen) > 1e-9) out.bound.rays.push_back(normalized(gen));
  out.bound.normalize();

  out.direct = normal_cone_at_infinity(omega, IndexSet::full(n), plan);
  out.inclusion = inclusion_certificate(out.direct, out.bound, plan.trunc_radius);
  return out;
}

nlohmann::json to_json(const QualificationReport& q) {
  nlohmann::json j;
  j["kind"] = qual_kind_name(q.kind);
  j["verdict"] = to_json(q.verdict);
  if (q.witness) j["witness"] = *q.witness;
  return j;
}

}  // namespace horizon
