#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "horizon/infinity.hpp"
#include "horizon/sets.hpp"

namespace horizon {
namespace {

std::vector<double> pin_values(int n_pinned) {
  if (n_pinned == 1) return {0.0, 0.25, -0.25, 1.0, -1.0, 4.0, -4.0};
  return {0.0, 1.0, -1.0};
}

void require_unbounded_domain(const FunctionSpec& f) {
  if (!domain_unbounded(f))
    fail(Errc::domain_bounded, "estimators at infinity need an unbounded effective domain");
}

// Minimize ||grad f||^2 on the sphere of radius r from a seed; finds thin
// channels where subgradients stay bounded while x escapes.
Vec near_critical_on_sphere(const FunctionSpec& f, Vec x, double r) {
  const int n = f.dim;
  auto grad_norm2 = [&](const Vec& y) {
    const GradResult g = try_gradient(f, y);
    if (!g.in_domain || !all_finite(g.grad)) return kPlusInf;
    return dot(g.grad, g.grad);
  };
  x = scaled(normalized(x), r);
  double fx = grad_norm2(x);
  if (!std::isfinite(fx)) return x;
  const double h = 1e-4 * (1.0 + r);
  for (int it = 0; it < 50; ++it) {
    Vec gr(n, 0.0);
    for (int j = 0; j < n; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      const double vp = grad_norm2(xp), vm = grad_norm2(xm);
      if (!std::isfinite(vp) || !std::isfinite(vm)) return x;
      gr[j] = (vp - vm) / (2 * h);
    }
    // tangential component on the sphere
    const Vec xn = normalized(x);
    axpy(-dot(gr, xn), xn, gr);
    const double gn = norm2(gr);
    if (gn < 1e-14) break;
    double t = r / (1.0 + gn);
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      Vec cand = x;
      axpy(-t, gr, cand);
      cand = scaled(normalized(cand), r);
      const double fc = grad_norm2(cand);
      if (std::isfinite(fc) && fc < fx * (1 - 1e-9) - 1e-18) {
        x = std::move(cand);
        fx = fc;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

bool has_indicator(const ExprNode& n) {
  if (n.kind == NodeKind::kIndicator) return true;
  for (const auto& kid : n.kids)
    if (has_indicator(*kid)) return true;
  if (n.kind == NodeKind::kCompose && n.outer && has_indicator(*n.outer->root)) return true;
  return false;
}

void collect_indicator_sets(const ExprNode& n,
                            std::vector<std::shared_ptr<const SetSpec>>& sets) {
  if (n.kind == NodeKind::kIndicator) sets.push_back(n.set);
  for (const auto& kid : n.kids) collect_indicator_sets(*kid, sets);
}

void dedupe_points(std::vector<Vec>& pts, double tol) {
  std::sort(pts.begin(), pts.end(), lex_less);
  std::vector<Vec> out;
  for (auto& p : pts) {
    bool dup = false;
    for (const auto& o : out)
      if (dist2(o, p) <= tol) dup = true;
    if (!dup) out.push_back(std::move(p));
  }
  pts = std::move(out);
}

// Track direction clusters together with their norm scale per level; a
// direction is a singular ray when it recurs over the stability window with
// norms that keep growing (Limsup r*subdiff with r -> 0).
class DivergenceTracker {
 public:
  DivergenceTracker(double tol, double tau) : tol_(tol), tau_(tau) {}

  void add(int level, const Vec& dir, double norm) {
    if (level >= static_cast<int>(levels_.size())) levels_.resize(level + 1);
    for (auto& c : levels_[level]) {
      if (chord_dist(c.dir, dir) <= 0.25 * tol_) {
        if (norm > c.max_norm) {
          c.max_norm = norm;
          c.dir = dir;  // representative follows the largest member
        }
        return;
      }
    }
    levels_[level].push_back(Cluster{dir, norm});
  }

  std::vector<Vec> accepted(int last, int window, double growth_gate) const {
    std::vector<Vec> out;
    if (last >= static_cast<int>(levels_.size()) || last - window + 1 < 0) return out;
    for (const auto& cand : levels_[last]) {
      if (cand.max_norm < tau_) continue;
      double lo = cand.max_norm, hi = cand.max_norm;
      bool recur = true;
      for (int lvl = last - window + 1; lvl < last && recur; ++lvl) {
        bool found = false;
        for (const auto& c : levels_[lvl]) {
          if (chord_dist(c.dir, cand.dir) <= tol_) {
            found = true;
            lo = std::min(lo, c.max_norm);
            hi = std::max(hi, c.max_norm);
          }
        }
        recur = found;
      }
      if (recur && hi / std::max(lo, 1e-300) >= growth_gate) out.push_back(cand.dir);
    }
    std::sort(out.begin(), out.end(), lex_less);
    return out;
  }

 private:
  struct Cluster {
    Vec dir;
    double max_norm = 0.0;
  };
  double tol_, tau_;
  std::vector<std::vector<Cluster>> levels_;
};

struct Sweep {
  RecurrenceTracker points{0.02, true};
  RecurrenceTracker cone_rays{0.02, false};
  RecurrenceTracker pw_singular{0.02, false};
  DivergenceTracker divergent{0.02, 8.0};
  std::vector<std::string> trace;
  int domain_misses = 0;
};

}  // namespace

std::vector<Vec> subdiff_sample_points(const FunctionSpec& f, const SamplingPlan& plan,
                                       int level) {
  const int n = f.dim;
  const double r = plan.radius(level);
  std::vector<Vec> pts;

  for (const auto& d : sphere_directions(n, plan.dirs_per_level, plan.seed, level))
    pts.push_back(scaled(d, r));

  // coordinate-pinned patterns: hold a small subset fixed, push the rest out
  for (int j = 0; j < n && n > 1; ++j) {
    for (double p : pin_values(1)) {
      Vec rest_template;
      const double rr = std::sqrt(std::max(r * r - p * p, 1.0));
      for (const auto& d : sphere_directions(n - 1, n == 2 ? 2 : 8, plan.seed, level)) {
        Vec x(n);
        x[j] = p;
        for (int k = 0, t = 0; k < n; ++k)
          if (k != j) x[k] = rr * d[t++];
        pts.push_back(std::move(x));
      }
      (void)rest_template;
    }
  }
  if (n > 2) {
    for (int j1 = 0; j1 < n; ++j1)
      for (int j2 = j1 + 1; j2 < n; ++j2)
        for (double p1 : pin_values(2))
          for (double p2 : pin_values(2)) {
            const double rr = std::sqrt(std::max(r * r - p1 * p1 - p2 * p2, 1.0));
            for (const auto& d : sphere_directions(n - 2, 2, plan.seed, level)) {
              Vec x(n);
              x[j1] = p1;
              x[j2] = p2;
              for (int k = 0, t = 0; k < n; ++k)
                if (k != j1 && k != j2) x[k] = rr * d[t++];
              pts.push_back(std::move(x));
            }
          }
  }

  // near-critical channel search (smooth functions only)
  if (f.has(kTagSmooth) && plan.adaptive_seeds > 0) {
    std::vector<Vec> seeds;
    for (int j = 0; j < n && static_cast<int>(seeds.size()) < plan.adaptive_seeds; ++j) {
      seeds.push_back(unit(n, j, 1.0));
      seeds.push_back(unit(n, j, -1.0));
    }
    const auto spiral = sphere_directions(n, plan.adaptive_seeds, plan.seed, level);
    seeds.insert(seeds.end(), spiral.begin(), spiral.end());
    int used = 0;
    for (const auto& s : seeds) {
      if (used++ >= plan.adaptive_seeds + 2 * n) break;
      pts.push_back(near_critical_on_sphere(f, s, r));
    }
  }

  // domain-adapted samples for indicator parts: points of the sets themselves
  std::vector<std::shared_ptr<const SetSpec>> sets;
  collect_indicator_sets(*f.root, sets);
  for (const auto& S : sets) {
    for (const auto& d : sphere_directions(n, std::max(8, plan.dirs_per_level / 4), plan.seed,
                                           level)) {
      try {
        for (const auto& y : project(*S, scaled(d, r))) pts.push_back(y);
      } catch (const Error&) {
        continue;
      }
    }
  }

  dedupe_points(pts, 1e-9 * (1.0 + r));
  return pts;
}

namespace {

int sweep_level(const FunctionSpec& f, const SamplingPlan& plan, int level, Sweep& sw) {
  const double r = plan.radius(level);
  int hits = 0, values = 0;
  for (Vec x : subdiff_sample_points(f, plan, level)) {
    // radial backoff keeps overflowing samples informative
    SubgradientSample s;
    bool ok = false;
    for (int back = 0; back < 7 && !ok; ++back) {
      if (in_domain(f, x)) {
        try {
          s = subdiff_at(f, x);
          bool finite = !s.values.empty() || !s.cone_rays.empty() || !s.singular_dirs.empty();
          for (const auto& v : s.values)
            if (!all_finite(v)) finite = false;
          if (finite) {
            ok = true;
            break;
          }
        } catch (const Error& e) {
          if (e.code() == Errc::unsupported_class) {
            // epigraph-normal fallback at this sample
            try {
              const LimitSet N = epigraph_normal_cone_sampled(f, x);
              for (const auto& ray : N.rays) {
                if (ray.back() < -0.05) {
                  Vec u(ray.begin(), ray.end() - 1);
                  s.values.push_back(scaled(u, -1.0 / ray.back()));
                } else if (std::fabs(ray.back()) <= 0.05) {
                  Vec u(ray.begin(), ray.end() - 1);
                  if (norm2(u) > 1e-9) s.singular_dirs.push_back(normalized(u));
                }
              }
              ok = true;
              break;
            } catch (const Error&) {
            }
          }
        }
      }
      x = scaled(x, 0.6);
      if (norm2(x) < plan.r0) break;
    }
    if (!ok) {
      ++sw.domain_misses;
      continue;
    }
    ++hits;
    for (const auto& u : s.values) {
      ++values;
      const double nu = norm2(u);
      sw.points.add(level, u);
      if (nu > 1e-12) sw.divergent.add(level, normalized(u), nu);
    }
    for (const auto& ray : s.cone_rays) sw.cone_rays.add(level, ray);
    for (const auto& dir : s.singular_dirs) sw.pw_singular.add(level, dir);
  }
  std::ostringstream tr;
  tr << "level " << level << ": r=" << r << " hits=" << hits << " values=" << values;
  sw.trace.push_back(tr.str());
  return hits;
}

}  // namespace

void compress_chains(LimitSet& L, double span_threshold) {
  bool changed = true;
  while (changed) {
    changed = false;
    const std::size_t m = L.points.size();
    for (std::size_t i = 0; i < m && !changed; ++i) {
      for (std::size_t j = i + 1; j < m && !changed; ++j) {
        const Vec d = normalized(sub(L.points[j], L.points[i]));
        if (norm2(sub(L.points[j], L.points[i])) < 1e-9) continue;
        std::vector<std::pair<double, std::size_t>> run;
        for (std::size_t k = 0; k < m; ++k) {
          const Vec rel = sub(L.points[k], L.points[i]);
          const double t = dot(rel, d);
          double off = 0.0;
          for (std::size_t c = 0; c < rel.size(); ++c) {
            const double e = rel[c] - t * d[c];
            off += e * e;
          }
          if (std::sqrt(off) <= 0.02 * (1.0 + std::fabs(t))) run.emplace_back(t, k);
        }
        if (run.size() < 3) continue;
        std::sort(run.begin(), run.end());
        const double span = run.back().first - run.front().first;
        if (span <= span_threshold) continue;
        // keep the innermost point as the base, drop the rest of the run
        const std::size_t base_idx = run.front().second;
        std::vector<Vec> next_points;
        for (std::size_t k = 0; k < m; ++k) {
          bool in_run = false;
          for (const auto& [t, idx] : run)
            if (idx == k && idx != base_idx) in_run = true;
          if (!in_run) next_points.push_back(L.points[k]);
        }
        L.points = std::move(next_points);
        bool have_ray = false;
        for (const auto& r : L.rays)
          if (chord_dist(r, d) <= 0.02) have_ray = true;
        if (!have_ray) L.rays.push_back(d);
        L.affine_rays = true;
        changed = true;
      }
    }
  }
  L.normalize();
}

InfinityEstimate estimate_infinity(const FunctionSpec& f, const SamplingPlan& plan) {
  plan.validate();
  require_unbounded_domain(f);
  Sweep sw;
  sw.points = RecurrenceTracker(plan.cluster_tol, true);
  sw.cone_rays = RecurrenceTracker(plan.cluster_tol, false);
  sw.pw_singular = RecurrenceTracker(plan.cluster_tol, false);
  sw.divergent = DivergenceTracker(plan.cluster_tol, plan.divergence_tau);
  for (int level = 0; level < plan.levels; ++level) {
    if (sweep_level(f, plan, level, sw) == 0) {
      // one re-sample with four times the directions before giving up on it
      SamplingPlan boosted = plan;
      boosted.dirs_per_level *= 4;
      sweep_level(f, boosted, level, sw);
      sw.trace.push_back("level re-sampled with 4x directions");
    }
  }

  InfinityEstimate est;
  est.trace = sw.trace;

  LimitSet lim;
  lim.dim = f.dim;
  lim.trunc_radius = plan.trunc_radius;
  lim.points = sw.points.accepted(plan.levels - 1, plan.window);
  lim.rays = sw.cone_rays.accepted(plan.levels - 1, plan.window);
  lim.affine_rays = !lim.rays.empty() && !lim.points.empty();
  compress_chains(lim, 2.0 * plan.trunc_radius);
  bool only_origin = true;
  for (const auto& p : lim.points)
    if (norm2(p) > 1e-7) only_origin = false;
  lim.is_cone = !lim.rays.empty() && only_origin && !lim.affine_rays;
  lim.normalize();
  est.limiting = lim;

  LimitSet sing = LimitSet::zero_cone(f.dim);
  sing.trunc_radius = plan.trunc_radius;
  const double growth_gate = std::pow(plan.rho, 0.5 * (plan.window - 1));
  sing.rays = sw.divergent.accepted(plan.levels - 1, plan.window, growth_gate);

  LimitSet pw = LimitSet::zero_cone(f.dim);
  pw.trunc_radius = plan.trunc_radius;
  pw.rays = sw.pw_singular.accepted(plan.levels - 1, plan.window);
  pw.normalize();
  est.pointwise_singular = pw;

  // Eqn (4) also absorbs the outer limit of pointwise singular subdifferentials.
  for (const auto& r : pw.rays) sing.rays.push_back(r);
  sing.normalize();
  est.singular = sing;
  return est;
}

LimitSet estimate_subdiff_at_infinity(const FunctionSpec& f, const SamplingPlan& plan) {
  return estimate_infinity(f, plan).limiting;
}

LimitSet estimate_singular_at_infinity(const FunctionSpec& f, const SamplingPlan& plan) {
  return estimate_infinity(f, plan).singular;
}

std::pair<LimitSet, LimitSet> subdiff_at_infinity_via_epigraph(const FunctionSpec& f,
                                                               const SamplingPlan& plan) {
  plan.validate();
  require_unbounded_domain(f);
  const SetSpec epi = make_epigraph(f);
  // Below-graph samples around the same head battery the direct route uses;
  // the set sweep adds its own boundary anchors and local probes.
  auto extra = [&](int level) {
    const double r = plan.radius(level);
    std::vector<Vec> out;
    for (const auto& x : subdiff_sample_points(f, plan, level)) {
      double fx = evaluate(f, x);
      Vec xx = x;
      int back = 0;
      while (!std::isfinite(fx) && back++ < 7 && norm2(xx) > plan.r0) {
        xx = scaled(xx, 0.6);
        fx = evaluate(f, xx);
      }
      if (!std::isfinite(fx)) continue;
      for (double c : {0.1, 1.0, 4.0}) {
        Vec below = xx;
        below.push_back(fx - c);
        out.push_back(std::move(below));
      }
    }
    return out;
  };
  const auto accepted =
      accepted_normal_dirs_at_infinity(epi, IndexSet::full(f.dim), plan, extra);

  LimitSet limiting;
  limiting.dim = f.dim;
  limiting.trunc_radius = plan.trunc_radius;
  LimitSet singular = LimitSet::zero_cone(f.dim);
  singular.trunc_radius = plan.trunc_radius;
  std::vector<std::pair<double, Vec>> singular_cands;  // (|t|, head dir)
  for (const auto& ray : accepted) {
    const double t = ray.back();
    Vec head(ray.begin(), ray.end() - 1);
    if (t <= -0.05) {
      limiting.points.push_back(scaled(head, -1.0 / t));
    } else if (std::fabs(t) < plan.cluster_tol && norm2(head) > 1e-9) {
      singular_cands.emplace_back(std::fabs(t), normalized(head));
    }
  }
  // One converging family produces several near-misses; the member with the
  // smallest vertical component is the closest to the actual limit direction.
  for (const auto& [t, dir] : singular_cands) {
    bool shadowed = false;
    for (const auto& [t2, dir2] : singular_cands)
      if (t2 < t && chord_dist(dir, dir2) <= 4 * plan.cluster_tol) shadowed = true;
    if (!shadowed) singular.rays.push_back(dir);
  }
  compress_chains(limiting, 2.0 * plan.trunc_radius);
  limiting.normalize();
  singular.normalize();
  return {limiting, singular};
}

Certificate check_nonemptiness(const FunctionSpec& f, const SamplingPlan& plan) {
  const InfinityEstimate est = estimate_infinity(f, plan);
  Certificate cert;
  const bool limiting_nonempty = !est.limiting.empty() || est.limiting.is_cone;
  const bool singular_nonzero = !est.singular.rays.empty();
  if (limiting_nonempty || singular_nonzero) {
    cert.verdict = Verdict::kHolds;
    cert.margin = 1.0;
    cert.trace.push_back(singular_nonzero ? "singular cone has a nonzero ray"
                                          : "limiting estimate nonempty");
  } else {
    cert.verdict = Verdict::kInconclusive;  // guaranteed true; empty means under-sampling
    cert.trace.push_back(
        "both estimates empty; refine the plan (more levels/directions) and retry");
  }
  return cert;
}

Certificate check_scaling_identities(const FunctionSpec& f, double lambda,
                                     const SamplingPlan& plan) {
  if (lambda <= 0) fail(Errc::semantic_error, "scaling requires lambda > 0");
  const InfinityEstimate base = estimate_infinity(f, plan);
  const InfinityEstimate scaled_est = estimate_infinity(make_scaled(f, lambda), plan);
  const LimitSet expect_limiting = scale_limit_set(base.limiting, lambda);
  const double T = plan.trunc_radius;
  const double h1 = hausdorff_trunc(scaled_est.limiting, expect_limiting, T);
  const double h2 = hausdorff_trunc(scaled_est.singular, base.singular, T);
  Certificate cert;
  cert.margin = std::max(h1, h2);
  cert.verdict = cert.margin <= 0.05 ? Verdict::kHolds : Verdict::kFails;
  std::ostringstream tr;
  tr << "H(limiting)=" << h1 << " H(singular)=" << h2 << " at T=" << T;
  cert.trace.push_back(tr.str());
  return cert;
}

nlohmann::json to_json(const InfinityEstimate& e, const SamplingPlan& plan) {
  nlohmann::json j;
  j["limiting"] = to_json(e.limiting);
  j["singular"] = to_json(e.singular);
  j["plan"] = {{"r0", plan.r0},
               {"rho", plan.rho},
               {"levels", plan.levels},
               {"dirs_per_level", plan.dirs_per_level},
               {"cluster_tol", plan.cluster_tol},
               {"divergence_tau", plan.divergence_tau},
               {"window", plan.window},
               {"seed", plan.seed},
               {"trunc_radius", plan.trunc_radius}};
  j["trace"] = e.trace;
  return j;
}

}  // namespace horizon
