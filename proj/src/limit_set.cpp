#include "horizon/limit_set.hpp"

#include <algorithm>
#include <cmath>

#include "horizon/lp.hpp"

namespace horizon {

double SamplingPlan::radius(int level) const { return r0 * std::pow(rho, level); }

void SamplingPlan::validate() const {
  if (r0 <= 0) fail(Errc::semantic_error, "plan: r0 must be positive");
  if (rho <= 1) fail(Errc::semantic_error, "plan: rho must exceed 1");
  if (window < 2 || levels < window) fail(Errc::semantic_error, "plan: need K >= m >= 2");
  if (cluster_tol <= 0) fail(Errc::semantic_error, "plan: cluster_tol must be positive");
  if (divergence_tau <= 1) fail(Errc::semantic_error, "plan: divergence_tau must exceed 1");
  if (dirs_per_level < 2) fail(Errc::semantic_error, "plan: need at least 2 directions");
}

SamplingPlan SamplingPlan::refined() const {
  SamplingPlan p = *this;
  p.levels += 2;
  p.dirs_per_level *= 2;
  p.adaptive_seeds += 2;
  return p;
}

IndexSet IndexSet::full(int dim) {
  IndexSet I;
  for (int i = 0; i < dim; ++i) I.indices.push_back(i);
  return I;
}

IndexSet IndexSet::of(std::vector<int> one_based, int dim) {
  IndexSet I;
  std::sort(one_based.begin(), one_based.end());
  one_based.erase(std::unique(one_based.begin(), one_based.end()), one_based.end());
  for (int i : one_based) {
    if (i < 1 || i > dim)
      fail(Errc::semantic_error, "index " + std::to_string(i) + " out of range");
    I.indices.push_back(i - 1);
  }
  if (I.indices.empty()) fail(Errc::semantic_error, "index set must be nonempty");
  return I;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kHolds: return "Holds";
    case Verdict::kFails: return "Fails";
    case Verdict::kInconclusive: return "Inconclusive";
  }
  return "?";
}

LimitSet LimitSet::zero_cone(int dim) {
  LimitSet L;
  L.dim = dim;
  L.is_cone = true;
  return L;
}

LimitSet LimitSet::empty_set(int dim) {
  LimitSet L;
  L.dim = dim;
  return L;
}

bool LimitSet::is_zero_cone(double tol) const {
  if (!is_cone || !rays.empty() || sphere) return false;
  for (const auto& p : points)
    if (norm2(p) > tol) return false;
  return true;
}

void LimitSet::normalize() {
  for (auto& r : rays) r = normalized(r);
  auto dedupe = [](std::vector<Vec>& vs) {
    std::sort(vs.begin(), vs.end(), lex_less);
    std::vector<Vec> out;
    for (auto& v : vs) {
      bool dup = false;
      for (const auto& o : out)
        if (dist2(o, v) <= 1e-7) dup = true;
      if (!dup) out.push_back(std::move(v));
    }
    vs = std::move(out);
  };
  dedupe(points);
  dedupe(rays);
  if (is_cone) {  // keep at most the origin in the point list
    std::vector<Vec> keep;
    for (auto& p : points)
      if (norm2(p) <= 1e-7) keep.push_back(std::move(p));
    points = keep.empty() ? std::vector<Vec>{} : std::vector<Vec>{zeros(dim)};
  }
}

double dist_to(const LimitSet& L, const Vec& x) {
  double best = std::numeric_limits<double>::infinity();
  if (L.is_cone) best = std::min(best, norm2(x));
  if (L.sphere) best = std::min(best, std::fabs(norm2(x) - 1.0));
  if (L.convex && !L.points.empty() && !L.rays.empty())
    best = std::min(best, dist_to_hull_sum(L.points, L.rays, x));
  else if (L.convex && L.points.size() >= 2)
    best = std::min(best, dist_to_convex_hull(L.points, x));
  else if (L.convex && !L.rays.empty() && L.points.empty())
    best = std::min(best, dist_to_conic_hull(L.rays, x));
  else {
    for (const auto& p : L.points) best = std::min(best, dist2(p, x));
    if (!L.rays.empty()) {
      std::vector<Vec> bases;
      if (L.affine_rays && !L.points.empty())
        bases = L.points;
      else
        bases.push_back(zeros(L.dim));
      for (const auto& b : bases)
        for (const auto& r : L.rays) best = std::min(best, dist_to_ray(x, b, r));
    }
  }
  return best;
}

std::vector<Vec> sample_within(const LimitSet& L, double T, double spacing) {
  std::vector<Vec> out;
  auto push = [&](const Vec& v) {
    if (norm2(v) <= T + 1e-12) out.push_back(v);
  };
  if (L.is_cone) push(zeros(L.dim));
  if (L.sphere && T >= 1.0)
    for (const auto& d : sphere_directions(L.dim, 128, 0, 0)) push(d);
  for (const auto& p : L.points) push(p);
  if (L.convex && L.points.size() >= 2) {
    for (std::size_t i = 0; i < L.points.size(); ++i)
      for (std::size_t j = i + 1; j < L.points.size(); ++j)
        for (int k = 1; k < 8; ++k) {
          const double t = k / 8.0;
          push(add(scaled(L.points[i], 1.0 - t), scaled(L.points[j], t)));
        }
  }
  std::vector<Vec> bases;
  if (L.affine_rays && !L.points.empty())
    bases = L.points;
  else
    bases.push_back(zeros(L.dim));
  for (const auto& b : bases) {
    if (norm2(b) > 4 * T + 1.0) continue;
    for (const auto& r : L.rays) {
      const double tmax = norm2(b) + 2 * T;
      for (double t = 0.0; t <= tmax; t += spacing) push(add(b, scaled(r, t)));
    }
  }
  if (L.convex && L.rays.size() >= 2 && !L.is_cone) {
    // pos-hull interior directions: pairwise mixtures
    for (std::size_t i = 0; i < L.rays.size(); ++i)
      for (std::size_t j = i + 1; j < L.rays.size(); ++j)
        for (int k = 1; k < 4; ++k) {
          const Vec mix = normalized(add(scaled(L.rays[i], k / 4.0), scaled(L.rays[j], 1.0 - k / 4.0)));
          for (double t = spacing; t <= 2 * T; t += spacing) push(scaled(mix, t));
        }
  }
  if (L.convex && L.is_cone && L.rays.size() >= 2) {
    for (std::size_t i = 0; i < L.rays.size(); ++i)
      for (std::size_t j = i + 1; j < L.rays.size(); ++j)
        for (int k = 1; k < 4; ++k) {
          const Vec mix = normalized(add(scaled(L.rays[i], k / 4.0), scaled(L.rays[j], 1.0 - k / 4.0)));
          for (double t = spacing; t <= T; t += spacing) push(scaled(mix, t));
        }
  }
  return out;
}

double hausdorff_trunc(const LimitSet& A, const LimitSet& B, double T, double spacing) {
  const auto sa = sample_within(A, T, spacing);
  const auto sb = sample_within(B, T, spacing);
  if (sa.empty() && sb.empty()) return 0.0;
  if (sa.empty() || sb.empty()) return std::numeric_limits<double>::infinity();
  double h = 0.0;
  for (const auto& a : sa) h = std::max(h, dist_to(B, a));
  for (const auto& b : sb) h = std::max(h, dist_to(A, b));
  return h;
}

bool subset_within(const LimitSet& A, const LimitSet& B, double T, double tol, Vec* witness) {
  for (const auto& a : sample_within(A, T, 0.025)) {
    if (dist_to(B, a) > tol) {
      if (witness) *witness = a;
      return false;
    }
  }
  return true;
}

LimitSet scale_limit_set(const LimitSet& L, double lambda) {
  LimitSet out = L;
  for (auto& p : out.points) p = scaled(p, lambda);
  if (lambda < 0)
    for (auto& r : out.rays) r = scaled(r, -1.0);
  out.normalize();
  return out;
}

LimitSet negate_limit_set(const LimitSet& L) { return scale_limit_set(L, -1.0); }

LimitSet union_limit_sets(const LimitSet& A, const LimitSet& B) {
  LimitSet out;
  out.dim = A.dim;
  out.trunc_radius = A.trunc_radius;
  // A union preserves cone-ness only if both are cones; hulls do not survive.
  out.is_cone = A.is_cone && B.is_cone;
  out.affine_rays = A.affine_rays || B.affine_rays;
  out.sphere = A.sphere || B.sphere;
  if ((A.convex && A.points.size() > 1) || (B.convex && B.points.size() > 1)) {
    // materialize hull edges as segment samples to avoid claiming a hull of the union
    for (const LimitSet* L : {&A, &B})
      for (const auto& s : sample_within(*L, 4 * A.trunc_radius, 0.05)) out.points.push_back(s);
    out.rays = A.rays;
    out.rays.insert(out.rays.end(), B.rays.begin(), B.rays.end());
  } else {
    out.points = A.points;
    out.points.insert(out.points.end(), B.points.begin(), B.points.end());
    out.rays = A.rays;
    out.rays.insert(out.rays.end(), B.rays.begin(), B.rays.end());
  }
  out.normalize();
  return out;
}

LimitSet minkowski_sum(const LimitSet& A, const LimitSet& B) {
  LimitSet out;
  out.dim = A.dim;
  out.trunc_radius = A.trunc_radius;
  if (A.empty() || B.empty()) return LimitSet::empty_set(A.dim);  // sum with empty is empty
  std::vector<Vec> pa = A.points, pb = B.points;
  if (pa.empty()) pa.push_back(zeros(A.dim));
  if (pb.empty()) pb.push_back(zeros(B.dim));
  for (const auto& p : pa)
    for (const auto& q : pb) out.points.push_back(add(p, q));
  out.rays = A.rays;
  out.rays.insert(out.rays.end(), B.rays.begin(), B.rays.end());
  out.affine_rays = !out.rays.empty();
  out.is_cone = A.is_cone && B.is_cone && out.points.empty();
  out.convex = A.convex && B.convex;
  out.normalize();
  return out;
}

LimitSet convex_hull_of(const LimitSet& L) {
  LimitSet out = L;
  out.convex = true;
  out.normalize();
  return out;
}

namespace {

struct ElementSpace {
  std::vector<Vec> bases;
  std::vector<Vec> rays;  // one-at-a-time rays (union semantics); empty Vec = no ray
  bool hull = false;      // convex: co(bases) + pos(rays)
};

ElementSpace element_space(const LimitSet& L) {
  ElementSpace e;
  if (L.convex) {
    e.hull = true;
    e.bases = L.points.empty() ? std::vector<Vec>{zeros(L.dim)} : L.points;
    e.rays = L.rays;
    return e;
  }
  if (L.affine_rays && !L.points.empty())
    e.bases = L.points;
  else {
    e.bases = L.points;
    if (!L.rays.empty() || L.is_cone) e.bases.push_back(zeros(L.dim));
  }
  e.rays = L.rays;
  return e;
}

}  // namespace

double dist_to_sum(const LimitSet& A, const LimitSet& B, const Vec& x) {
  if (A.empty() || B.empty()) return std::numeric_limits<double>::infinity();
  const ElementSpace ea = element_space(A), eb = element_space(B);
  double best = std::numeric_limits<double>::infinity();
  auto ray_options = [](const ElementSpace& e) {
    std::vector<Vec> opts{Vec{}};
    for (const auto& r : e.rays) opts.push_back(r);
    return opts;
  };
  if (!ea.hull && !eb.hull) {
    for (const auto& pa : ea.bases)
      for (const auto& pb : eb.bases) {
        const Vec base = sub(add(pa, pb), x);
        for (const auto& ra : ray_options(ea))
          for (const auto& rb : ray_options(eb))
            best = std::min(best, least_norm_two_rays(base, ra, Vec{}, rb));
      }
    return best;
  }
  // Hull on at least one side: enumerate the union side, golden-section over
  // the scalar ray parameter, exact hull distance inside.
  const bool a_hull = ea.hull;
  const ElementSpace& hull_side = a_hull ? ea : eb;
  const ElementSpace& enum_side = a_hull ? eb : ea;
  auto hull_dist = [&](const Vec& target) {
    if (hull_side.rays.empty()) return dist_to_convex_hull(hull_side.bases, target);
    return dist_to_hull_sum(hull_side.bases, hull_side.rays, target);
  };
  for (const auto& pb : enum_side.bases) {
    for (const auto& rb : ray_options(enum_side)) {
      if (rb.empty()) {
        best = std::min(best, hull_dist(sub(x, pb)));
        continue;
      }
      // minimize over s >= 0: convex in s
      double lo = 0.0, hi = 1.0;
      auto value = [&](double s) {
        Vec target = sub(x, pb);
        axpy(-s, rb, target);
        return hull_dist(target);
      };
      while (value(hi) < value(hi * 0.9999) && hi < 1e6) hi *= 2;  // bracket the minimum
      const double gr = 0.6180339887498949;
      double a = lo, b = hi;
      double c = b - gr * (b - a), d = a + gr * (b - a);
      for (int it = 0; it < 80; ++it) {
        if (value(c) < value(d))
          b = d;
        else
          a = c;
        c = b - gr * (b - a);
        d = a + gr * (b - a);
      }
      best = std::min(best, value(0.5 * (a + b)));
      best = std::min(best, value(0.0));
    }
  }
  return best;
}

nlohmann::json to_json(const LimitSet& L) {
  nlohmann::json j;
  j["points"] = L.points;
  j["rays"] = L.rays;
  j["is_cone"] = L.is_cone;
  j["trunc_radius"] = L.trunc_radius;
  j["dim"] = L.dim;
  if (L.affine_rays) j["affine_rays"] = true;
  if (L.convex) j["convex"] = true;
  if (L.sphere) j["sphere"] = true;
  return j;
}

LimitSet limit_set_from_json(const nlohmann::json& j) {
  LimitSet L;
  L.dim = j.value("dim", 0);
  for (const auto& p : j.at("points")) L.points.push_back(p.get<Vec>());
  for (const auto& r : j.at("rays")) L.rays.push_back(r.get<Vec>());
  L.is_cone = j.at("is_cone").get<bool>();
  L.trunc_radius = j.at("trunc_radius").get<double>();
  L.affine_rays = j.value("affine_rays", false);
  L.convex = j.value("convex", false);
  L.sphere = j.value("sphere", false);
  if (L.dim == 0 && !L.points.empty()) L.dim = static_cast<int>(L.points[0].size());
  if (L.dim == 0 && !L.rays.empty()) L.dim = static_cast<int>(L.rays[0].size());
  return L;
}

nlohmann::json to_json(const Certificate& c) {
  nlohmann::json j;
  j["verdict"] = verdict_name(c.verdict);
  j["margin"] = c.margin;
  j["witnesses"] = c.witnesses;
  j["trace"] = c.trace;
  return j;
}

std::vector<Vec> sphere_directions(int dim, int count, unsigned seed, int level) {
  std::vector<Vec> dirs;
  if (dim == 1) {
    dirs.push_back(Vec{1.0});
    dirs.push_back(Vec{-1.0});
    return dirs;
  }
  for (int j = 0; j < dim; ++j) {
    dirs.push_back(unit(dim, j, 1.0));
    dirs.push_back(unit(dim, j, -1.0));
  }
  const double jitter =
      seed == 0 ? 0.0 : std::fmod(0.6180339887498949 * (seed + 1315423911u % 1000003), 1.0);
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double theta =
          2.0 * M_PI * (std::fmod(k * 0.6180339887498949 + jitter + 0.05 * level, 1.0));
      dirs.push_back(Vec{std::cos(theta), std::sin(theta)});
    }
    return dirs;
  }
  // Halton-to-Gaussian map for dim >= 3.
  auto halton = [](int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
      f /= base;
      r += f * (index % base);
      index /= base;
    }
    return r;
  };
  const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
  for (int k = 0; k < count; ++k) {
    Vec d(dim);
    for (int j = 0; j < dim; ++j) {
      const double u = std::min(std::max(halton(k + 1 + 37 * level, primes[j % 8]) + jitter, 1e-9),
                                1.0 - 1e-9);
      const double v = std::min(std::max(halton(k + 1 + 37 * level, primes[(j + 3) % 8]), 1e-9),
                                1.0 - 1e-9);
      d[j] = std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * std::fmod(v, 1.0));
    }
    if (norm2(d) > 1e-9) dirs.push_back(normalized(d));
  }
  return dirs;
}

void RecurrenceTracker::add(int level, const Vec& v) {
  if (level >= static_cast<int>(levels_.size())) levels_.resize(level + 1);
  auto& clusters = levels_[level];
  for (auto& c : clusters) {
    if (dist2(c.rep, v) <= tol_at(v)) {
      // running mean keeps the representative centered
      const double w = 1.0 / (c.count + 1);
      for (std::size_t i = 0; i < c.rep.size(); ++i) c.rep[i] = (1 - w) * c.rep[i] + w * v[i];
      ++c.count;
      return;
    }
  }
  clusters.push_back(Cluster{v, 1});
}

double RecurrenceTracker::tol_at(const Vec& v) const {
  return scale_aware_ ? tol_ * (1.0 + norm2(v)) : tol_;
}

std::vector<Vec> RecurrenceTracker::accepted(int last_level, int window) const {
  std::vector<Vec> out;
  if (last_level < 0 || last_level >= static_cast<int>(levels_.size())) return out;
  if (last_level - window + 1 < 0) return out;
  for (const auto& cand : levels_[last_level]) {
    bool ok = true;
    for (int lvl = last_level - window + 1; lvl < last_level && ok; ++lvl) {
      if (lvl >= static_cast<int>(levels_.size())) {
        ok = false;
        break;
      }
      bool found = false;
      for (const auto& c : levels_[lvl])
        if (dist2(c.rep, cand.rep) <= 2.0 * tol_at(cand.rep)) found = true;
      ok = found;
    }
    if (ok) out.push_back(cand.rep);
  }
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

}  // namespace horizon
