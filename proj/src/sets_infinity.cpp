#include <algorithm>
#include <cmath>
#include <sstream>

#include "horizon/lp.hpp"
#include "horizon/sets.hpp"

namespace horizon {
namespace {

Vec pi_of(const Vec& x, const IndexSet& I) {
  Vec p;
  p.reserve(I.indices.size());
  for (int i : I.indices) p.push_back(x[i]);
  return p;
}

double pi_norm(const Vec& x, const IndexSet& I) { return norm2(pi_of(x, I)); }

std::vector<int> complement_of(const IndexSet& I, int dim) {
  std::vector<int> nonI;
  for (int j = 0; j < dim; ++j)
    if (std::find(I.indices.begin(), I.indices.end(), j) == I.indices.end()) nonI.push_back(j);
  return nonI;
}

std::vector<Vec> completion_tuples(int k, double r) {
  if (k == 0) return {Vec{}};
  std::vector<double> vals;
  if (k == 1)
    vals = {0.0, 0.25, -0.25, 1.0, -1.0, 4.0, -4.0, r / 4, -r / 4, r / 2, -r / 2};
  else
    vals = {0.0, 1.0, -1.0, r / 4, -r / 4};
  if (k <= 2) {
    std::vector<Vec> out;
    Vec cur(k, 0.0);
    if (k == 1) {
      for (double v : vals) out.push_back(Vec{v});
    } else {
      for (double v1 : vals)
        for (double v2 : vals) out.push_back(Vec{v1, v2});
    }
    return out;
  }
  std::vector<Vec> out{Vec(k, 0.0)};
  for (int j = 0; j < k; ++j)
    for (double v : {1.0, -1.0, r / 4, -r / 4}) {
      Vec c(k, 0.0);
      c[j] = v;
      out.push_back(std::move(c));
    }
  return out;
}

// Enumerate sample points x with ||pi(x)|| = r over directions x completions.
template <typename Fn>
void for_each_sample(const SetSpec& S, const IndexSet& I, const SamplingPlan& plan, int level,
                     const Fn& fn) {
  const double r = plan.radius(level);
  const int k = static_cast<int>(I.indices.size());
  const auto dirs = sphere_directions(k, plan.dirs_per_level, plan.seed, level);
  const auto nonI = complement_of(I, S.dim);

  // Epigraph sets get function-adapted last-coordinate completions.
  const bool epi_adapted = S.kind == SetKind::kEpigraph && nonI.size() == 1 &&
                           nonI[0] == S.dim - 1;
  for (const auto& d : dirs) {
    if (epi_adapted) {
      Vec head(S.dim - 1);
      for (int j = 0; j < k; ++j) head[I.indices[j]] = r * d[j];
      const double fv = evaluate(*S.epi_f, head);
      std::vector<double> ts;
      if (std::isfinite(fv))  // modest drops: deep ones hit a large-gap trap
        ts = {fv - 0.1, fv - 1.0, fv - 4.0, fv, fv + 1.0};
      else
        ts = {0.0, 1.0, -1.0, r / 4, -r / 4, r / 2, -r / 2};
      for (double t : ts) {
        Vec x = head;
        x.push_back(t);
        fn(x);
      }
      continue;
    }
    for (const auto& c : completion_tuples(static_cast<int>(nonI.size()), r)) {
      Vec x(S.dim, 0.0);
      for (int j = 0; j < k; ++j) x[I.indices[j]] = r * d[j];
      for (std::size_t j = 0; j < nonI.size(); ++j) x[nonI[j]] = c[j];
      fn(x);
    }
  }
}

// Oriented normal of a graph set at an on-set point (unit).
std::optional<Vec> graph_oriented_normal(const SetSpec& S, const Vec& y) {
  if (S.kind != SetKind::kGraph) return std::nullopt;
  Vec rest;
  for (int j = 0; j < S.dim; ++j)
    if (j != S.graph_coord) rest.push_back(y[j]);
  const GradResult r = try_gradient(*S.graph_phi, rest, /*strict_underflow=*/false);
  if (!r.in_domain) return std::nullopt;
  Vec nu;
  for (int j = 0, kk = 0; j < S.dim; ++j) {
    if (j == S.graph_coord)
      nu.push_back(-1.0);
    else
      nu.push_back(r.grad[kk++]);
  }
  return normalized(nu);
}

struct SweepResult {
  RecurrenceTracker offsets{0.02, false};
  std::vector<std::pair<int, Vec>> onset;  // (level, boundary point)
  double max_boundary_pi = 0.0;
  int discarded = 0;
  int offset_count = 0;
};

Vec assemble(const IndexSet& I, const std::vector<int>& nonI, int dim, const Vec& pi_part,
             const Vec& c) {
  Vec x(dim, 0.0);
  for (std::size_t j = 0; j < I.indices.size(); ++j) x[I.indices[j]] = pi_part[j];
  for (std::size_t j = 0; j < nonI.size(); ++j) x[nonI[j]] = c[j];
  return x;
}

// Structure-aware boundary anchors: on-set points whose pi-coordinates sit on
// the sphere of radius r.  These reach boundary branches that projections of
// moderate grid samples cannot (steep constraint surfaces).
std::vector<Vec> boundary_anchors(const SetSpec& S, const IndexSet& I, const SamplingPlan& plan,
                                  int level) {
  const double r = plan.radius(level);
  const auto nonI = complement_of(I, S.dim);
  const int k = static_cast<int>(I.indices.size());
  std::vector<Vec> anchors;
  const auto dirs = sphere_directions(k, std::min(plan.dirs_per_level, 16), plan.seed, level);

  // graphs/epigraphs: the dependent coordinate is explicit
  const bool graph_like = S.kind == SetKind::kGraph || S.kind == SetKind::kEpigraph;
  const int dep_coord = S.kind == SetKind::kGraph ? S.graph_coord : S.dim - 1;
  if (graph_like &&
      std::find(nonI.begin(), nonI.end(), dep_coord) != nonI.end() && nonI.size() == 1) {
    const FunctionSpec& phi = S.kind == SetKind::kGraph ? *S.graph_phi : *S.epi_f;
    for (const auto& d : dirs) {
      // radius backoff: stay just inside the representable horizon
      for (double rr = r; rr >= std::max(plan.r0, r / 64); rr *= 0.5) {
        Vec rest(k);
        for (int j = 0; j < k; ++j) rest[j] = rr * d[j];
        const double v = evaluate(phi, rest);
        if (!std::isfinite(v)) continue;
        anchors.push_back(assemble(I, nonI, S.dim, scaled(d, rr), Vec{v}));
        break;
      }
    }
    return anchors;
  }

  // inequality/equality systems: root-solve each constraint over the free
  // coordinates (1-D bisection along grid brackets)
  std::vector<FunctionSpec> cons;
  if (S.kind == SetKind::kConstraintSystem) {
    cons = S.g;
    cons.insert(cons.end(), S.h.begin(), S.h.end());
  } else if (S.kind == SetKind::kHalfspace) {
    cons.push_back(make_affine(S.a, -S.b));
  } else if (S.kind == SetKind::kPolyhedron) {
    for (std::size_t i = 0; i < S.A.size(); ++i) cons.push_back(make_affine(S.A[i], -S.bvec[i]));
  }
  if (cons.empty() || nonI.size() != 1) return anchors;
  const std::vector<double> grid = {0.0,    0.25,   -0.25,  1.0,    -1.0,   4.0,
                                    -4.0,   16.0,   -16.0,  r / 4,  -r / 4, r / 2,
                                    -r / 2, r,      -r};
  for (const auto& fn : cons) {
    for (const auto& d : dirs) {
      // radius backoff past the overflow horizon of steep constraints
      double rr = r;
      for (; rr >= std::max(plan.r0, r / 64); rr *= 0.5) {
        bool finite_somewhere = false;
        for (double c : {0.0, 1.0, -1.0})
          if (std::isfinite(evaluate(fn, assemble(I, nonI, S.dim, scaled(d, rr), Vec{c}))))
            finite_somewhere = true;
        if (finite_somewhere) break;
      }
      const Vec pi_part = scaled(d, rr);
      auto value = [&](double c) {
        return evaluate(fn, assemble(I, nonI, S.dim, pi_part, Vec{c}));
      };
      auto geo_mid = [](double a, double b) {  // overflow-safe geometric mean
        return a * std::sqrt(b / a);
      };
      auto bisect_push = [&](double a, double b, double fa, double fb, bool log_space) {
        const bool same_sign = (a > 0) == (b > 0) && a != 0.0 && b != 0.0;
        for (int it = 0; it < 90; ++it) {
          const double mid =
              (log_space && same_sign) ? geo_mid(a, b) : 0.5 * (a + b);
          const double fm = value(mid);
          if (!std::isfinite(fm)) break;
          if (fa * fm <= 0.0) {
            b = mid;
            fb = fm;
          } else {
            a = mid;
            fa = fm;
          }
        }
        (void)fb;
        const double c_final = (log_space && same_sign) ? geo_mid(a, b) : 0.5 * (a + b);
        const Vec y = assemble(I, nonI, S.dim, pi_part, Vec{c_final});
        if (set_contains(S, y, 1e-6 * (1.0 + norm2(y))) ||
            set_violation_scaled(S, y) <= 1e-6)
          anchors.push_back(y);
      };
      bool bracketed = false;
      for (std::size_t gi = 0; gi + 1 < grid.size(); ++gi) {
        const double a = grid[gi], b = grid[gi + 1];
        const double fa = value(a), fb = value(b);
        if (!std::isfinite(fa) || !std::isfinite(fb)) continue;
        if (fa == 0.0) {
          anchors.push_back(assemble(I, nonI, S.dim, pi_part, Vec{a}));
          bracketed = true;
          continue;
        }
        if (fa * fb >= 0.0) continue;
        bracketed = true;
        bisect_push(a, b, fa, fb, /*log_space=*/false);
      }
      if (!bracketed) {
        // steep dependencies (e.g. exp) put the root far outside the grid:
        // expand geometrically and bisect in log space
        for (double sgn : {1.0, -1.0}) {
          double prev = sgn * 1.0;
          double fprev = value(prev);
          if (!std::isfinite(fprev)) continue;
          for (int k = 1; k <= 1020; ++k) {
            const double cur = prev * 2.0;
            const double fcur = value(cur);
            if (!std::isfinite(fcur)) break;
            if (fprev * fcur <= 0.0) {
              bisect_push(prev, cur, fprev, fcur, /*log_space=*/true);
              break;
            }
            prev = cur;
            fprev = fcur;
          }
        }
      }
    }
  }
  std::sort(anchors.begin(), anchors.end(), lex_less);
  anchors.erase(std::unique(anchors.begin(), anchors.end()), anchors.end());
  if (anchors.size() > 24) anchors.resize(24);
  return anchors;
}

SweepResult sweep(const SetSpec& S, const IndexSet& I, const SamplingPlan& plan,
                  const std::function<std::vector<Vec>(int)>& extra_samples = {}) {
  SweepResult res;
  res.offsets = RecurrenceTracker(plan.cluster_tol, false);
  for (int level = 0; level < plan.levels; ++level) {
    const double rlev = plan.radius(level);
    auto probe_offsets = [&](const Vec& x) {
      const double pnx = pi_norm(x, I);
      if (pnx <= 0) return;
      if (set_contains(S, x)) {
        if (!set_interior_contains(S, x)) {
          res.onset.emplace_back(level, x);
          res.max_boundary_pi = std::max(res.max_boundary_pi, pnx);
        }
        return;
      }
      std::vector<Vec> ys;
      try {
        ys = project(S, x);
      } catch (const Error&) {
        return;
      }
      double known_bound = kPlusInf;  // exact upper bound on the true distance
      if (S.kind == SetKind::kEpigraph) {
        const double fv = evaluate(*S.epi_f, Vec(x.begin(), x.end() - 1));
        if (std::isfinite(fv)) known_bound = std::max(fv - x.back(), 0.0);
      } else if (S.kind == SetKind::kGraph) {
        Vec rest;
        for (int j = 0; j < S.dim; ++j)
          if (j != S.graph_coord) rest.push_back(x[j]);
        const double fv = evaluate(*S.graph_phi, rest);
        if (std::isfinite(fv)) known_bound = std::fabs(fv - x[S.graph_coord]);
      }
      for (const auto& y : ys) {
        const double d = dist2(x, y);
        if (d > known_bound * 1.0001 + 1e-12) {  // projection demonstrably not nearest
          ++res.discarded;
          continue;
        }
        if (d <= 1e-9 * (1.0 + pnx)) {
          res.onset.emplace_back(level, y);
          res.max_boundary_pi = std::max(res.max_boundary_pi, pi_norm(y, I));
          continue;
        }
        if (d > pnx / 2) {  // keep only samples whose projections also escape
          ++res.discarded;
          continue;
        }
        const Vec dir = normalized(sub(x, y));
        if (const auto nu = graph_oriented_normal(S, y)) {
          if (dot(dir, *nu) < -1e-6) continue;  // off-orientation side
        }
        // reprojection consistency: the half-offset point must project back
        // along the same direction; numerical-noise offsets fail this
        {
          Vec mid = y;
          axpy(0.5 * d, dir, mid);
          bool trusted = false;
          try {
            for (const auto& y2 : project(S, mid)) {
              const double d2 = dist2(mid, y2);
              if (d2 >= 0.1 * d && d2 <= 0.8 * d &&
                  chord_dist(normalized(sub(mid, y2)), dir) <= 0.05)
                trusted = true;
            }
          } catch (const Error&) {
          }
          if (!trusted) {
            ++res.discarded;
            continue;
          }
        }
        res.offsets.add(level, dir);
        ++res.offset_count;
        res.onset.emplace_back(level, y);
        res.max_boundary_pi = std::max(res.max_boundary_pi, pi_norm(y, I));
      }
    };
    for_each_sample(S, I, plan, level, probe_offsets);
    if (extra_samples)
      for (const auto& x : extra_samples(level)) probe_offsets(x);
    // boundary anchors + local off-set probes around escaping anchors
    for (const Vec& y : boundary_anchors(S, I, plan, level)) {
      const double pny = pi_norm(y, I);
      // anchors beyond the double-overflow horizon saturate near exp-range
      if (pny < std::min(rlev / 4, 128.0)) continue;
      res.onset.emplace_back(level, y);
      res.max_boundary_pi = std::max(res.max_boundary_pi, pny);
      std::vector<Vec> probe_dirs;
      try {
        const LimitSet cone = normal_cone_at(S, y);
        for (const auto& nu : cone.rays) {
          probe_dirs.push_back(nu);
          probe_dirs.push_back(scaled(nu, -1.0));
        }
      } catch (const Error&) {
      }
      const auto extra = sphere_directions(S.dim, 2, plan.seed, level);
      probe_dirs.insert(probe_dirs.end(), extra.begin(), extra.end());
      for (const auto& nu : probe_dirs) {
        for (double eps : {0.01, 0.5, 4.0}) {
          Vec x = y;
          axpy(eps, nu, x);
          if (!all_finite(x)) continue;
          probe_offsets(x);
        }
      }
    }
  }
  return res;
}

void require_projected_unbounded(const SetSpec& S, const IndexSet& I) {
  if (!set_projected_unbounded(S, &I))
    fail(Errc::unbounded_projection_required, "projected set is bounded");
}

}  // namespace

std::vector<Vec> accepted_normal_dirs_at_infinity(
    const SetSpec& S, const IndexSet& I, const SamplingPlan& plan,
    const std::function<std::vector<Vec>(int)>& extra_samples) {
  plan.validate();
  const SweepResult res = sweep(S, I, plan, extra_samples);
  return res.offsets.accepted(plan.levels - 1, plan.window);
}

LimitSet normal_cone_at_infinity(const SetSpec& S, const IndexSet& I, const SamplingPlan& plan) {
  plan.validate();
  require_projected_unbounded(S, I);
  const SweepResult res = sweep(S, I, plan);
  LimitSet L = LimitSet::zero_cone(S.dim);
  L.trunc_radius = plan.trunc_radius;
  L.rays = res.offsets.accepted(plan.levels - 1, plan.window);
  L.normalize();
  if (L.rays.empty() && res.offset_count > 0 &&
      res.max_boundary_pi >= plan.radius(plan.levels - plan.window) / 2) {
    fail(Errc::inconclusive_sampling,
         "boundary escapes but no offset direction stabilized over the last levels");
  }
  return L;
}

LimitSet normal_cone_at_infinity_onset(const SetSpec& S, const IndexSet& I,
                                       const SamplingPlan& plan) {
  plan.validate();
  require_projected_unbounded(S, I);
  const SweepResult res = sweep(S, I, plan);
  RecurrenceTracker rays(plan.cluster_tol, false);
  for (const auto& [level, y] : res.onset) {
    LimitSet cone;
    try {
      cone = normal_cone_at(S, y);
    } catch (const Error&) {
      continue;
    }
    for (const auto& r : cone.rays) rays.add(level, r);
  }
  LimitSet L = LimitSet::zero_cone(S.dim);
  L.trunc_radius = plan.trunc_radius;
  L.rays = rays.accepted(plan.levels - 1, plan.window);
  L.normalize();
  return L;
}

Certificate boundary_escape(const SetSpec& S, const IndexSet& I, const SamplingPlan& plan) {
  plan.validate();
  require_projected_unbounded(S, I);
  const SweepResult res = sweep(S, I, plan);
  const double need = plan.radius(plan.levels - 1) / 2;
  const bool boundary_found = res.max_boundary_pi >= need;

  LimitSet cone = LimitSet::zero_cone(S.dim);
  cone.rays = res.offsets.accepted(plan.levels - 1, plan.window);
  cone.normalize();
  const bool cone_nonzero = !cone.is_zero_cone();

  Certificate cert;
  std::ostringstream tr;
  tr << "max boundary pi-norm " << res.max_boundary_pi << " vs threshold " << need
     << "; stabilized rays " << cone.rays.size();
  cert.trace.push_back(tr.str());
  if (boundary_found == cone_nonzero) {
    cert.verdict = boundary_found ? Verdict::kHolds : Verdict::kFails;
    cert.margin = boundary_found ? res.max_boundary_pi / need : 1.0;
  } else {
    cert.verdict = Verdict::kInconclusive;
    cert.margin = 0.0;
    for (const auto& r : cone.rays) cert.witnesses.push_back(r);
    cert.trace.push_back("projection route and cone estimate disagree");
  }
  return cert;
}

IntersectionRuleResult check_intersection_rule(const SetSpec& S1, const SetSpec& S2,
                                               const IndexSet& I, const SamplingPlan& plan) {
  IntersectionRuleResult out;
  const SetSpec S12 = intersect_sets(S1, S2);
  if (!find_feasible_point(S12))
    fail(Errc::empty_intersection, "no common point found for the two sets");
  require_projected_unbounded(S12, I);

  out.cone1 = normal_cone_at_infinity(S1, I, plan);
  out.cone2 = normal_cone_at_infinity(S2, I, plan);

  // Qualification: N1 meets -N2 only at the origin.
  out.qualification.verdict = Verdict::kHolds;
  out.qualification.margin = 2.0;  // smallest pairwise chord distance observed
  for (const auto& r1 : out.cone1.rays)
    for (const auto& r2 : out.cone2.rays) {
      const double c = chord_dist(r1, scaled(r2, -1.0));
      out.qualification.margin = std::min(out.qualification.margin, c);
      if (c <= 2 * plan.cluster_tol) {
        out.qualification.verdict = Verdict::kFails;
        out.qualification.witnesses.push_back(r1);
      }
    }
  if (out.qualification.verdict == Verdict::kFails) {
    out.inclusion.verdict = Verdict::kInconclusive;
    out.inclusion.trace.push_back("qualification failed; inclusion not evaluated");
    return out;
  }

  out.cone_intersection = normal_cone_at_infinity(S12, I, plan);
  const LimitSet bound = minkowski_sum(out.cone1, out.cone2);
  Vec witness;
  const bool ok =
      subset_within(out.cone_intersection, bound, plan.trunc_radius, 0.05, &witness);
  out.inclusion.verdict = ok ? Verdict::kHolds : Verdict::kFails;
  out.inclusion.margin = 0.05;
  if (!ok) out.inclusion.witnesses.push_back(witness);
  return out;
}

ProductConeResult product_cone(const SetSpec& S1, const IndexSet& I1, const SetSpec& S2,
                               const IndexSet& I2, const SamplingPlan& plan) {
  ProductConeResult out;
  require_projected_unbounded(S1, I1);
  require_projected_unbounded(S2, I2);
  const LimitSet L1 = normal_cone_at_infinity(S1, I1, plan);
  const LimitSet L2 = normal_cone_at_infinity(S2, I2, plan);

  const SetSpec prod = make_product(S1, S2);
  IndexSet I;
  I.indices = I1.indices;
  for (int i : I2.indices) I.indices.push_back(S1.dim + i);

  // product cone N1 x N2: rays embed on either factor; cross terms live in
  // the sampled membership test below rather than the representation.
  LimitSet P = LimitSet::zero_cone(prod.dim);
  P.trunc_radius = plan.trunc_radius;
  for (const auto& r : L1.rays) {
    Vec rr = r;
    rr.resize(prod.dim, 0.0);
    P.rays.push_back(std::move(rr));
  }
  for (const auto& r : L2.rays) {
    Vec rr = zeros(S1.dim);
    rr.insert(rr.end(), r.begin(), r.end());
    P.rays.push_back(std::move(rr));
  }
  P.normalize();
  out.product = P;
  out.direct = normal_cone_at_infinity(prod, I, plan);

  // inclusion N1 x N2 subset of N(product): test pairs (a, b) with dist
  // measured exactly per factor on the direct estimate's representation.
  bool ok = true;
  Vec witness;
  const double T = plan.trunc_radius;
  for (const auto& a : sample_within(L1, T, 0.05)) {
    for (const auto& b : sample_within(L2, T, 0.05)) {
      Vec c = a;
      c.insert(c.end(), b.begin(), b.end());
      if (dist_to(out.direct, c) > 0.05) {
        ok = false;
        witness = c;
        break;
      }
    }
    if (!ok) break;
  }
  out.inclusion.verdict = ok ? Verdict::kHolds : Verdict::kFails;
  if (!ok) out.inclusion.witnesses.push_back(witness);
  // strictness: a direct element far from the product cone
  double strict_gap = 0.0;
  for (const auto& c : sample_within(out.direct, T, 0.05)) {
    double da = dist_to(L1, Vec(c.begin(), c.begin() + S1.dim));
    double db = dist_to(L2, Vec(c.begin() + S1.dim, c.end()));
    strict_gap = std::max(strict_gap, std::sqrt(da * da + db * db));
  }
  out.inclusion.margin = strict_gap;
  std::ostringstream tr;
  tr << (strict_gap > 0.05 ? "strict inclusion; " : "equality within tolerance; ")
     << "largest direct-to-product gap " << strict_gap;
  out.inclusion.trace.push_back(tr.str());
  return out;
}

bool set_projected_unbounded(const SetSpec& S, const IndexSet* I_opt) {
  const IndexSet I = I_opt ? *I_opt : IndexSet::full(S.dim);
  switch (S.kind) {
    case SetKind::kWhole:
      return true;
    case SetKind::kHalfspace:
      return true;  // halfspaces project unboundedly onto every axis subset
    case SetKind::kBall:
      return false;
    case SetKind::kPolyhedron: {
      // recession direction with a nonzero pi-component
      std::vector<Vec> rows = S.A;
      const int n = S.dim;
      if (!recession_cone_nontrivial(rows, n)) return false;
      // cheap refinement: probe by projection below
      break;
    }
    default:
      break;
  }
  double maxpi = 0.0;
  for (double r : {64.0, 512.0}) {
    double level_max = 0.0;
    SamplingPlan probe;
    probe.dirs_per_level = 12;
    const int k = static_cast<int>(I.indices.size());
    for (const auto& d : sphere_directions(k, 12, 0, 0)) {
      for (const auto& c : completion_tuples(S.dim - k, r)) {
        Vec x(S.dim, 0.0);
        const auto nonI = complement_of(I, S.dim);
        for (int j = 0; j < k; ++j) x[I.indices[j]] = r * d[j];
        for (std::size_t j = 0; j < nonI.size(); ++j) x[nonI[j]] = c[j];
        try {
          for (const auto& y : project(S, x)) level_max = std::max(level_max, pi_norm(y, I));
        } catch (const Error&) {
          continue;
        }
      }
    }
    if (level_max < r / 4) return false;
    maxpi = std::max(maxpi, level_max);
  }
  return maxpi > 0;
}

bool set_bounded_probe(const SetSpec& S) {
  switch (S.kind) {
    case SetKind::kWhole:
    case SetKind::kHalfspace:
    case SetKind::kEpigraph:
    case SetKind::kGraph:
      return false;
    case SetKind::kBall:
      return true;
    case SetKind::kPolyhedron:
      return !recession_cone_nontrivial(S.A, S.dim);
    case SetKind::kProduct:
      return set_bounded_probe(*S.s1) && set_bounded_probe(*S.s2);
    case SetKind::kConstraintSystem:
      return !set_projected_unbounded(S);
  }
  return false;
}

}  // namespace horizon
