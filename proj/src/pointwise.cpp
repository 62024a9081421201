#include <algorithm>
#include <cmath>

#include "horizon/pointwise.hpp"

namespace horizon {
namespace {

// Split an additive tree into its indicator sets and the remaining summand.
// Returns false when an indicator occurs in a non-additive position.
bool split_additive(const NodePtr& node, std::vector<std::shared_ptr<const SetSpec>>& sets,
                    std::vector<NodePtr>& rest) {
  if (node->kind == NodeKind::kIndicator) {
    sets.push_back(node->set);
    return true;
  }
  if (node->kind == NodeKind::kAdd) {
    return split_additive(node->kids[0], sets, rest) &&
           split_additive(node->kids[1], sets, rest);
  }
  // any other subtree must be indicator-free
  std::vector<std::shared_ptr<const SetSpec>> probe;
  std::vector<NodePtr> inner;
  std::function<bool(const ExprNode&)> has_ind = [&](const ExprNode& n) {
    if (n.kind == NodeKind::kIndicator) return true;
    for (const auto& kid : n.kids)
      if (has_ind(*kid)) return true;
    if (n.kind == NodeKind::kCompose && n.outer && has_ind(*n.outer->root)) return true;
    return false;
  };
  if (has_ind(*node)) return false;
  rest.push_back(node);
  return true;
}

NodePtr sum_of(const std::vector<NodePtr>& parts, int dim) {
  if (parts.empty()) {
    ExprNode z;
    z.kind = NodeKind::kConstant;
    z.value = 0.0;
    return std::make_shared<const ExprNode>(std::move(z));
  }
  NodePtr acc = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) {
    ExprNode n;
    n.kind = NodeKind::kAdd;
    n.kids = {acc, parts[i]};
    acc = std::make_shared<const ExprNode>(std::move(n));
  }
  (void)dim;
  return acc;
}

bool locally_lipschitz_at(const FunctionSpec& f, const Vec& x) {
  // finite value, enumerable finite gradients, no indicator in the tree
  std::vector<std::shared_ptr<const SetSpec>> sets;
  std::vector<NodePtr> rest;
  if (!split_additive(f.root, sets, rest) || !sets.empty()) return false;
  try {
    selection_gradients(f, x);
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace

LimitSet epigraph_normal_cone_sampled(const FunctionSpec& f, const Vec& x) {
  const double fx = evaluate(f, x);
  if (!std::isfinite(fx)) fail(Errc::semantic_error, "point outside effective domain");
  SetSpec epi = make_epigraph(f);
  Vec z = x;
  z.push_back(fx);
  RecurrenceTracker tracker(0.02, false);
  for (int level = 0; level < 4; ++level) {
    const double eps = 0.25 / std::pow(4.0, level);
    for (const auto& d : sphere_directions(epi.dim, 24, 0, level)) {
      Vec probe = z;
      axpy(eps, d, probe);
      std::vector<Vec> ys;
      try {
        ys = project(epi, probe);
      } catch (const Error&) {
        continue;
      }
      for (const auto& y : ys) {
        const double dd = dist2(probe, y);
        if (dd <= 1e-10) continue;
        tracker.add(level, normalized(sub(probe, y)));
      }
    }
  }
  LimitSet L = LimitSet::zero_cone(epi.dim);
  L.rays = tracker.accepted(3, 2);
  L.normalize();
  return L;
}

SubgradientSample subdiff_at(const FunctionSpec& f, const Vec& x) {
  SubgradientSample s;
  s.location = x;
  s.f_value = evaluate(f, x);
  if (!std::isfinite(s.f_value)) fail(Errc::semantic_error, "point outside effective domain");

  std::vector<std::shared_ptr<const SetSpec>> sets;
  std::vector<NodePtr> rest;
  if (!split_additive(f.root, sets, rest))
    fail(Errc::unsupported_class, "indicator appears in a non-additive position");

  if (!sets.empty()) {
    const FunctionSpec smooth_part = make_from_root(sum_of(rest, f.dim), f.dim);
    for (const auto& gr : selection_gradients(smooth_part, x)) s.values.push_back(gr);
    for (const auto& S : sets) {
      const LimitSet N = normal_cone_at(*S, x);
      for (const auto& r : N.rays) {
        s.cone_rays.push_back(r);
        s.singular_dirs.push_back(r);
      }
    }
    std::sort(s.values.begin(), s.values.end(), lex_less);
    std::sort(s.cone_rays.begin(), s.cone_rays.end(), lex_less);
    std::sort(s.singular_dirs.begin(), s.singular_dirs.end(), lex_less);
    return s;
  }

  s.values = selection_gradients(f, x);  // throws UnsupportedClass when needed
  s.convex_hull = f.has(kTagConvex) && s.values.size() > 1;
  return s;
}

LimitSet singular_subdiff_at(const FunctionSpec& f, const Vec& x) {
  if (!in_domain(f, x)) fail(Errc::semantic_error, "point outside effective domain");
  LimitSet L = LimitSet::zero_cone(f.dim);

  std::vector<std::shared_ptr<const SetSpec>> sets;
  std::vector<NodePtr> rest;
  if (split_additive(f.root, sets, rest)) {
    if (sets.empty()) {
      if (locally_lipschitz_at(f, x)) return L;  // {0}
    } else {
      bool smooth_ok = true;
      try {
        selection_gradients(make_from_root(sum_of(rest, f.dim), f.dim), x);
      } catch (const Error&) {
        smooth_ok = false;
      }
      if (smooth_ok) {
        for (const auto& S : sets) {
          const LimitSet N = normal_cone_at(*S, x);
          for (const auto& r : N.rays) L.rays.push_back(r);
        }
        L.normalize();
        return L;
      }
    }
  }

  // epigraph-normal sampling fallback: horizontal normals are singular dirs
  const LimitSet N = epigraph_normal_cone_sampled(f, x);
  for (const auto& r : N.rays) {
    if (std::fabs(r.back()) <= 0.05) {
      Vec head(r.begin(), r.end() - 1);
      if (norm2(head) > 1e-9) L.rays.push_back(normalized(head));
    }
  }
  L.normalize();
  return L;
}

SubgradientSample pointwise_sum_rule(const FunctionSpec& f1, const FunctionSpec& f2, const Vec& x) {
  const bool lip1 = locally_lipschitz_at(f1, x);
  const bool lip2 = locally_lipschitz_at(f2, x);
  if (!lip1 && !lip2)
    fail(Errc::both_non_lipschitz, "the pointwise sum rule needs one Lipschitz summand");
  const SubgradientSample a = subdiff_at(f1, x);
  const SubgradientSample b = subdiff_at(f2, x);
  SubgradientSample s;
  s.location = x;
  s.f_value = a.f_value + b.f_value;
  for (const auto& u : a.values)
    for (const auto& v : b.values) s.values.push_back(add(u, v));
  s.cone_rays = a.cone_rays;
  s.cone_rays.insert(s.cone_rays.end(), b.cone_rays.begin(), b.cone_rays.end());
  s.singular_dirs = a.singular_dirs;
  s.singular_dirs.insert(s.singular_dirs.end(), b.singular_dirs.begin(), b.singular_dirs.end());
  s.convex_hull = a.convex_hull || b.convex_hull || !s.cone_rays.empty();
  std::sort(s.values.begin(), s.values.end(), lex_less);
  std::sort(s.cone_rays.begin(), s.cone_rays.end(), lex_less);
  std::sort(s.singular_dirs.begin(), s.singular_dirs.end(), lex_less);
  return s;
}

LimitSet sample_to_limit_set(const SubgradientSample& s, int dim) {
  LimitSet L;
  L.dim = dim;
  L.points = s.values;
  L.rays = s.cone_rays;
  L.convex = s.convex_hull;
  L.affine_rays = !L.rays.empty() && !L.points.empty();
  L.is_cone = L.points.empty() && !L.rays.empty();
  L.normalize();
  return L;
}

nlohmann::json to_json(const SubgradientSample& s) {
  nlohmann::json j;
  j["location"] = s.location;
  j["level"] = s.level;
  j["values"] = s.values;
  j["cone_rays"] = s.cone_rays;
  j["singular_dirs"] = s.singular_dirs;
  j["f_value"] = s.f_value;
  j["convex_hull"] = s.convex_hull;
  return j;
}

}  // namespace horizon
