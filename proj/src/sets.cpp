#include <algorithm>
#include <cmath>
#include <sstream>

#include "horizon/lp.hpp"
#include "horizon/sets.hpp"

namespace horizon {
namespace {

constexpr double kMemberTol = 1e-8;

double frac(double v) { return v - std::floor(v); }

Vec probe_point(int dim, int i, double scale) {
  Vec x(dim);
  for (int j = 0; j < dim; ++j)
    x[j] = scale * (2.0 * frac(0.5 + (i + 1) * frac(std::sqrt(2.0 + j) * 0.618033988749895)) - 1.0);
  return x;
}

Vec head_of(const Vec& x, int n) { return Vec(x.begin(), x.begin() + n); }

Vec drop_coord(const Vec& x, int coord) {
  Vec r;
  r.reserve(x.size() - 1);
  for (std::size_t i = 0; i < x.size(); ++i)
    if (static_cast<int>(i) != coord) r.push_back(x[i]);
  return r;
}

Vec insert_coord(const Vec& rest, int coord, double v) {
  Vec r;
  r.reserve(rest.size() + 1);
  for (std::size_t i = 0, j = 0; i < rest.size() + 1; ++i) {
    if (static_cast<int>(i) == coord)
      r.push_back(v);
    else
      r.push_back(rest[j++]);
  }
  return r;
}

}  // namespace

// --- builders ---------------------------------------------------------------

SetSpec make_whole(int dim) {
  SetSpec S;
  S.dim = dim;
  S.kind = SetKind::kWhole;
  return S;
}

SetSpec make_halfspace(const Vec& a, double b) {
  SetSpec S;
  S.dim = static_cast<int>(a.size());
  S.kind = SetKind::kHalfspace;
  S.a = a;
  S.b = b;
  if (norm2(a) < 1e-12) fail(Errc::semantic_error, "halfspace normal must be nonzero");
  return S;
}

SetSpec make_ball(const Vec& center, double radius) {
  SetSpec S;
  S.dim = static_cast<int>(center.size());
  S.kind = SetKind::kBall;
  S.center = center;
  S.radius = radius;
  if (radius <= 0) fail(Errc::semantic_error, "ball radius must be positive");
  return S;
}

SetSpec make_polyhedron(std::vector<Vec> A, Vec b) {
  SetSpec S;
  S.kind = SetKind::kPolyhedron;
  if (A.empty()) fail(Errc::semantic_error, "polyhedron needs at least one row");
  S.dim = static_cast<int>(A[0].size());
  S.A = std::move(A);
  S.bvec = std::move(b);
  return S;
}

SetSpec make_constraint_system(std::vector<FunctionSpec> g, std::vector<FunctionSpec> h) {
  SetSpec S;
  S.kind = SetKind::kConstraintSystem;
  if (g.empty() && h.empty()) fail(Errc::semantic_error, "empty constraint system");
  S.dim = g.empty() ? h[0].dim : g[0].dim;
  S.g = std::move(g);
  S.h = std::move(h);
  return S;
}

SetSpec make_graph(int dim, int coord_one_based, const FunctionSpec& phi) {
  SetSpec S;
  S.kind = SetKind::kGraph;
  S.dim = dim;
  S.graph_coord = coord_one_based - 1;
  if (S.graph_coord < 0 || S.graph_coord >= dim)
    fail(Errc::semantic_error, "graph coordinate out of range");
  if (phi.dim != dim - 1) fail(Errc::dimension_mismatch, "graph function must live on R^{dim-1}");
  S.graph_phi = phi;
  return S;
}

SetSpec make_epigraph(const FunctionSpec& f) {
  SetSpec S;
  S.kind = SetKind::kEpigraph;
  S.dim = f.dim + 1;
  S.epi_f = f;
  return S;
}

SetSpec make_product(const SetSpec& s1, const SetSpec& s2) {
  SetSpec S;
  S.kind = SetKind::kProduct;
  S.dim = s1.dim + s2.dim;
  S.s1 = std::make_shared<const SetSpec>(s1);
  S.s2 = std::make_shared<const SetSpec>(s2);
  return S;
}

namespace {

// Express any set as constraint functions over its own space.
void as_constraints(const SetSpec& S, std::vector<FunctionSpec>& g, std::vector<FunctionSpec>& h) {
  switch (S.kind) {
    case SetKind::kWhole:
      return;
    case SetKind::kHalfspace:
      g.push_back(make_affine(S.a, -S.b));
      return;
    case SetKind::kBall: {
      std::ostringstream os;
      os << "norm(";
      for (int j = 0; j < S.dim; ++j) {
        if (j) os << ",";
        os << "x" << (j + 1) << "-" << S.center[j];
      }
      os << ")-" << S.radius;
      g.push_back(parse_function(os.str(), S.dim));
      return;
    }
    case SetKind::kPolyhedron:
      for (std::size_t i = 0; i < S.A.size(); ++i) g.push_back(make_affine(S.A[i], -S.bvec[i]));
      return;
    case SetKind::kConstraintSystem:
      g.insert(g.end(), S.g.begin(), S.g.end());
      h.insert(h.end(), S.h.begin(), S.h.end());
      return;
    case SetKind::kGraph: {
      // h(x) = x_coord - phi(rest)
      NodePtr var = std::make_shared<const ExprNode>([&] {
        ExprNode n;
        n.kind = NodeKind::kVar;
        n.var = S.graph_coord;
        return n;
      }());
      std::vector<FunctionSpec> rest_vars;
      for (int j = 0, k = 0; j < S.dim; ++j) {
        if (j == S.graph_coord) continue;
        Vec a = zeros(S.dim);
        a[j] = 1.0;
        rest_vars.push_back(make_affine(a, 0.0));
        (void)k;
      }
      FunctionSpec phi_full = make_compose(*S.graph_phi, rest_vars);
      ExprNode diff;
      diff.kind = NodeKind::kSub;
      diff.kids = {var, phi_full.root};
      h.push_back(make_from_root(std::make_shared<const ExprNode>(std::move(diff)), S.dim));
      return;
    }
    default:
      fail(Errc::semantic_error, "set kind not expressible as a constraint system");
  }
}

}  // namespace

SetSpec intersect_sets(const SetSpec& s1, const SetSpec& s2) {
  if (s1.dim != s2.dim) fail(Errc::dimension_mismatch, "intersection of sets in different spaces");
  if (to_string(s1) == to_string(s2)) return s1;  // keep oriented kinds intact
  std::vector<FunctionSpec> g, h;
  as_constraints(s1, g, h);
  as_constraints(s2, g, h);
  if (g.empty() && h.empty()) return make_whole(s1.dim);
  return make_constraint_system(std::move(g), std::move(h));
}

// --- membership -------------------------------------------------------------

// First-order distance surrogate: violations divided by constraint gradient
// norms.  Raw residuals are meaningless next to constraints as steep as e^x.
double set_violation_scaled(const SetSpec& S, const Vec& x) {
  switch (S.kind) {
    case SetKind::kConstraintSystem: {
      double r = 0.0;
      for (const auto& gi : S.g) {
        const GradResult g = try_gradient(gi, x, /*strict_underflow=*/false);
        if (!g.in_domain) return kPlusInf;
        r = std::max(r, std::max(0.0, g.value) / (1.0 + norm2(g.grad)));
      }
      for (const auto& hj : S.h) {
        const GradResult g = try_gradient(hj, x, /*strict_underflow=*/false);
        if (!g.in_domain) return kPlusInf;
        r = std::max(r, std::fabs(g.value) / (1.0 + norm2(g.grad)));
      }
      return r;
    }
    case SetKind::kEpigraph: {
      const GradResult g = try_gradient(*S.epi_f, head_of(x, S.dim - 1), /*strict_underflow=*/false);
      if (!g.in_domain) return kPlusInf;
      return std::max(0.0, g.value - x[S.dim - 1]) / (1.0 + norm2(g.grad));
    }
    case SetKind::kGraph: {
      const GradResult g = try_gradient(*S.graph_phi, drop_coord(x, S.graph_coord), /*strict_underflow=*/false);
      if (!g.in_domain) return kPlusInf;
      return std::fabs(x[S.graph_coord] - g.value) / (1.0 + norm2(g.grad));
    }
    default:
      return set_residual(S, x);
  }
}

double set_residual(const SetSpec& S, const Vec& x) {
  switch (S.kind) {
    case SetKind::kWhole:
      return 0.0;
    case SetKind::kHalfspace:
      return std::max(0.0, (dot(S.a, x) - S.b) / norm2(S.a));
    case SetKind::kBall:
      return std::max(0.0, dist2(x, S.center) - S.radius);
    case SetKind::kPolyhedron: {
      double r = 0.0;
      for (std::size_t i = 0; i < S.A.size(); ++i)
        r = std::max(r, (dot(S.A[i], x) - S.bvec[i]) / std::max(norm2(S.A[i]), 1e-12));
      return r;
    }
    case SetKind::kConstraintSystem: {
      double r = 0.0;
      for (const auto& gi : S.g) {
        const double v = evaluate(gi, x);
        if (!std::isfinite(v)) return kPlusInf;
        r = std::max(r, std::max(0.0, v));
      }
      for (const auto& hj : S.h) {
        const double v = evaluate(hj, x);
        if (!std::isfinite(v)) return kPlusInf;
        r = std::max(r, std::fabs(v));
      }
      return r;
    }
    case SetKind::kGraph: {
      const double v = evaluate(*S.graph_phi, drop_coord(x, S.graph_coord));
      if (!std::isfinite(v)) return kPlusInf;
      return std::fabs(x[S.graph_coord] - v);
    }
    case SetKind::kEpigraph: {
      const double v = evaluate(*S.epi_f, head_of(x, S.dim - 1));
      if (!std::isfinite(v)) return kPlusInf;
      return std::max(0.0, v - x[S.dim - 1]);
    }
    case SetKind::kProduct:
      return std::max(set_residual(*S.s1, head_of(x, S.s1->dim)),
                      set_residual(*S.s2, Vec(x.begin() + S.s1->dim, x.end())));
  }
  return kPlusInf;
}

bool set_contains(const SetSpec& S, const Vec& x, double tol) {
  return set_residual(S, x) <= tol;
}

bool set_interior_contains(const SetSpec& S, const Vec& x, double margin) {
  switch (S.kind) {
    case SetKind::kWhole:
      return true;
    case SetKind::kHalfspace:
      return dot(S.a, x) - S.b <= -margin * norm2(S.a);
    case SetKind::kBall:
      return dist2(x, S.center) <= S.radius - margin;
    case SetKind::kPolyhedron: {
      for (std::size_t i = 0; i < S.A.size(); ++i)
        if (dot(S.A[i], x) - S.bvec[i] > -margin * std::max(norm2(S.A[i]), 1e-12)) return false;
      return true;
    }
    case SetKind::kConstraintSystem: {
      if (!S.h.empty()) return false;
      for (const auto& gi : S.g) {
        const double v = evaluate(gi, x);
        if (!std::isfinite(v) || v > -margin) return false;
      }
      return true;
    }
    case SetKind::kGraph:
      return false;
    case SetKind::kEpigraph: {
      const double v = evaluate(*S.epi_f, head_of(x, S.dim - 1));
      return std::isfinite(v) && v < x[S.dim - 1] - margin;
    }
    case SetKind::kProduct:
      return set_interior_contains(*S.s1, head_of(x, S.s1->dim), margin) &&
             set_interior_contains(*S.s2, Vec(x.begin() + S.s1->dim, x.end()), margin);
  }
  return false;
}

// --- projection -------------------------------------------------------------

namespace {

struct Objective {
  // value and gradient of the penalized distance objective
  virtual double value(const Vec& y) const = 0;
  virtual Vec grad(const Vec& y) const = 0;
  virtual ~Objective() = default;
};

Vec descend(const Objective& obj, Vec y, int max_iter) {
  double fy = obj.value(y);
  if (!std::isfinite(fy)) return y;
  for (int it = 0; it < max_iter; ++it) {
    Vec gr = obj.grad(y);
    const double gn = norm2(gr);
    if (!std::isfinite(gn) || gn < 1e-13) break;
    double t = 1.0 / (1.0 + gn);
    bool moved = false;
    for (int bt = 0; bt < 48; ++bt) {
      Vec cand = y;
      axpy(-t, gr, cand);
      const double fc = obj.value(cand);
      if (std::isfinite(fc) && fc < fy - 0.25 * t * gn * gn) {
        y = std::move(cand);
        fy = fc;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) break;
  }
  return y;
}

// Log-scaled violation objective: finite and well-conditioned even when raw
// violations overflow squared doubles; used to reach the feasible region
// before the quadratic penalty takes over.
struct LogViolationObjective final : Objective {
  const SetSpec* S;

  double value(const Vec& y) const override {
    double v = 0.0;
    for (const auto& gi : S->g) {
      const double g = evaluate(gi, y);
      if (!std::isfinite(g)) return kPlusInf;
      v += std::log1p(std::max(0.0, g));
    }
    for (const auto& hj : S->h) {
      const double h = evaluate(hj, y);
      if (!std::isfinite(h)) return kPlusInf;
      v += std::log1p(std::fabs(h));
    }
    return v;
  }

  Vec grad(const Vec& y) const override {
    Vec gr = zeros(y.size());
    for (const auto& gi : S->g) {
      const GradResult r = try_gradient(gi, y, /*strict_underflow=*/false);
      if (!r.in_domain) return gr;
      if (r.value > 0) axpy(1.0 / (1.0 + r.value), r.grad, gr);
    }
    for (const auto& hj : S->h) {
      const GradResult r = try_gradient(hj, y, /*strict_underflow=*/false);
      if (!r.in_domain) return gr;
      const double sgn = r.value >= 0 ? 1.0 : -1.0;
      axpy(sgn / (1.0 + std::fabs(r.value)), r.grad, gr);
    }
    return gr;
  }
};

struct PenaltyObjective final : Objective {
  const SetSpec* S;
  Vec x;
  double mu;

  double value(const Vec& y) const override {
    double pen = 0.0;
    for (const auto& gi : S->g) {
      const double v = evaluate(gi, y);
      if (!std::isfinite(v)) return kPlusInf;
      pen += std::max(0.0, v) * std::max(0.0, v);
    }
    for (const auto& hj : S->h) {
      const double v = evaluate(hj, y);
      if (!std::isfinite(v)) return kPlusInf;
      pen += v * v;
    }
    const double d = dist2(y, x);
    return d * d + mu * pen;
  }

  Vec grad(const Vec& y) const override {
    Vec gr = scaled(sub(y, x), 2.0);
    for (const auto& gi : S->g) {
      const GradResult r = try_gradient(gi, y, /*strict_underflow=*/false);
      if (!r.in_domain) return gr;
      if (r.value > 0) axpy(2.0 * mu * r.value, r.grad, gr);
    }
    for (const auto& hj : S->h) {
      const GradResult r = try_gradient(hj, y, /*strict_underflow=*/false);
      if (!r.in_domain) return gr;
      axpy(2.0 * mu * r.value, r.grad, gr);
    }
    return gr;
  }
};

struct GraphObjective final : Objective {
  const FunctionSpec* phi;
  Vec xrest;
  double xc;

  double value(const Vec& y) const override {
    const double v = evaluate(*phi, y);
    if (!std::isfinite(v)) return kPlusInf;
    const double d = dist2(y, xrest);
    return d * d + (v - xc) * (v - xc);
  }

  Vec grad(const Vec& y) const override {
    Vec gr = scaled(sub(y, xrest), 2.0);
    const GradResult r = try_gradient(*phi, y, /*strict_underflow=*/false);
    if (r.in_domain) axpy(2.0 * (r.value - xc), r.grad, gr);
    return gr;
  }
};

struct EpiObjective final : Objective {
  const FunctionSpec* f;
  Vec xhead;
  double xt;
  bool force_active = false;  // keep the surface term on; finds tilted contacts

  double value(const Vec& y) const override {
    const double v = evaluate(*f, y);
    if (!std::isfinite(v)) return kPlusInf;
    const double excess = force_active ? v - xt : std::max(0.0, v - xt);
    const double d = dist2(y, xhead);
    return d * d + excess * excess;
  }

  Vec grad(const Vec& y) const override {
    Vec gr = scaled(sub(y, xhead), 2.0);
    const GradResult r = try_gradient(*f, y, /*strict_underflow=*/false);
    if (r.in_domain && (force_active || r.value > xt)) axpy(2.0 * (r.value - xt), r.grad, gr);
    return gr;
  }
};

// Gauss-Newton polish for surface contact: solve (y-xh) + (f(y)-t) grad f = 0
// via the Sherman-Morrison inverse of I + grad grad^T.
void epi_contact_polish(const FunctionSpec& f, const Vec& xhead, double xt, Vec& y) {
  for (int it = 0; it < 30; ++it) {
    const GradResult g = try_gradient(f, y, /*strict_underflow=*/false);
    if (!g.in_domain || !all_finite(g.grad)) return;
    Vec resid = sub(y, xhead);
    axpy(g.value - xt, g.grad, resid);
    if (norm2(resid) <= 1e-13 * (1.0 + norm2(xhead))) return;
    const double ww = dot(g.grad, g.grad);
    Vec step = resid;
    axpy(-dot(g.grad, resid) / (1.0 + ww), g.grad, step);
    // damped acceptance on the force-active objective
    auto val = [&](const Vec& z) {
      const double v = evaluate(f, z);
      if (!std::isfinite(v)) return kPlusInf;
      const double d = dist2(z, xhead);
      return d * d + (v - xt) * (v - xt);
    };
    const double base = val(y);
    bool moved = false;
    for (double a : {1.0, 0.5, 0.25, 0.1, 0.01}) {
      Vec cand = y;
      axpy(-a, step, cand);
      if (val(cand) < base) {
        y = cand;
        moved = true;
        break;
      }
    }
    if (!moved) return;
  }
}

// Newton steps on the active constraint residuals drive feasibility from
// ~1e-8 down to machine precision.
void gauss_newton_restore(const SetSpec& S, Vec& y) {
  for (int it = 0; it < 4; ++it) {
    std::vector<Vec> J;
    Vec c;
    for (const auto& gi : S.g) {
      const GradResult r = try_gradient(gi, y, /*strict_underflow=*/false);
      if (!r.in_domain) return;
      if (r.value > -1e-12) {
        J.push_back(r.grad);
        c.push_back(r.value);
      }
    }
    for (const auto& hj : S.h) {
      const GradResult r = try_gradient(hj, y, /*strict_underflow=*/false);
      if (!r.in_domain) return;
      J.push_back(r.grad);
      c.push_back(r.value);
    }
    if (J.empty()) return;
    const int k = static_cast<int>(J.size());
    std::vector<Vec> G(k, Vec(k));
    for (int a = 0; a < k; ++a) {
      for (int b = 0; b < k; ++b) G[a][b] = dot(J[a], J[b]);
      G[a][a] += 1e-12;
    }
    const auto alpha = lin_solve(G, c);
    if (!alpha) return;
    Vec cand = y;
    for (int a = 0; a < k; ++a) axpy(-(*alpha)[a], J[a], cand);
    if (set_residual(S, cand) < set_residual(S, y)) y = cand;
  }
}

std::vector<Vec> multistart_points(const Vec& x, double span) {
  std::vector<Vec> starts{x};
  const int n = static_cast<int>(x.size());
  for (int j = 0; j < n; ++j)
    for (double off : {0.5, -0.5, 2.0, -2.0, span, -span}) {
      Vec s = x;
      s[j] += off;
      starts.push_back(std::move(s));
    }
  starts.push_back(zeros(n));
  return starts;
}

void keep_best_candidates(std::vector<Vec>& cands, const Vec& x) {
  if (cands.empty()) return;
  double best = kPlusInf;
  for (const auto& c : cands) best = std::min(best, dist2(c, x));
  std::vector<Vec> out;
  std::sort(cands.begin(), cands.end(), lex_less);
  for (const auto& c : cands) {
    if (dist2(c, x) > best + 1e-6 * (1.0 + best)) continue;
    bool dup = false;
    for (const auto& o : out)
      if (dist2(o, c) <= 1e-6) dup = true;
    if (!dup) out.push_back(c);
    if (out.size() >= 4) break;
  }
  cands = std::move(out);
}

std::vector<Vec> project_polyhedron(const SetSpec& S, const Vec& x) {
  const int m = static_cast<int>(S.A.size());
  if (set_contains(S, x)) return {x};
  double best = kPlusInf;
  Vec bestY;
  const int subsets = 1 << std::min(m, 12);
  for (int mask = 1; mask < subsets; ++mask) {
    std::vector<int> J;
    for (int i = 0; i < m && i < 12; ++i)
      if (mask >> i & 1) J.push_back(i);
    const int k = static_cast<int>(J.size());
    std::vector<Vec> G(k, Vec(k));
    Vec rhs(k);
    for (int a = 0; a < k; ++a) {
      rhs[a] = dot(S.A[J[a]], x) - S.bvec[J[a]];
      for (int bcol = 0; bcol < k; ++bcol) G[a][bcol] = dot(S.A[J[a]], S.A[J[bcol]]);
      G[a][a] += 1e-14;
    }
    auto alpha = lin_solve(G, rhs);
    if (!alpha) continue;
    bool kkt = true;
    for (double av : *alpha)
      if (av < -1e-9) kkt = false;
    if (!kkt) continue;
    Vec y = x;
    for (int a = 0; a < k; ++a) axpy(-(*alpha)[a], S.A[J[a]], y);
    if (!set_contains(S, y, 1e-7 * (1.0 + norm2(y)))) continue;
    const double d = dist2(y, x);
    if (d < best) {
      best = d;
      bestY = y;
    }
  }
  if (bestY.empty()) fail(Errc::projection_failed, "polyhedron projection failed");
  return {bestY};
}

}  // namespace

std::vector<Vec> project(const SetSpec& S, const Vec& x) {
  switch (S.kind) {
    case SetKind::kWhole:
      return {x};
    case SetKind::kHalfspace: {
      const double slack = dot(S.a, x) - S.b;
      if (slack <= 0) return {x};
      Vec y = x;
      axpy(-slack / dot(S.a, S.a), S.a, y);
      return {y};
    }
    case SetKind::kBall: {
      const double d = dist2(x, S.center);
      if (d <= S.radius) return {x};
      Vec y = S.center;
      axpy(S.radius / d, sub(x, S.center), y);
      return {y};
    }
    case SetKind::kPolyhedron:
      return project_polyhedron(S, x);
    case SetKind::kGraph: {
      const Vec xrest = drop_coord(x, S.graph_coord);
      GraphObjective obj;
      obj.phi = &*S.graph_phi;
      obj.xrest = xrest;
      obj.xc = x[S.graph_coord];
      std::vector<Vec> cands;
      for (const auto& start : multistart_points(xrest, std::max(1.0, norm2(xrest) / 8.0))) {
        Vec y = descend(obj, start, 160);
        const double v = evaluate(*S.graph_phi, y);
        if (!std::isfinite(v)) continue;
        cands.push_back(insert_coord(y, S.graph_coord, v));
      }
      if (cands.empty()) fail(Errc::projection_failed, "graph projection found no finite point");
      keep_best_candidates(cands, x);
      return cands;
    }
    case SetKind::kEpigraph: {
      const Vec xhead = head_of(x, S.dim - 1);
      const double xt = x[S.dim - 1];
      if (set_contains(S, x)) return {x};
      EpiObjective obj;
      obj.f = &*S.epi_f;
      obj.xhead = xhead;
      obj.xt = xt;
      EpiObjective active = obj;
      active.force_active = true;
      std::vector<Vec> cands;
      for (const auto& start : multistart_points(xhead, std::max(1.0, norm2(xhead) / 8.0))) {
        for (int pass = 0; pass < 2; ++pass) {
          Vec y = descend(pass == 0 ? obj : static_cast<const Objective&>(active), start, 200);
          if (pass == 1) epi_contact_polish(*S.epi_f, xhead, xt, y);
          const double v = evaluate(*S.epi_f, y);
          if (!std::isfinite(v)) continue;
          Vec z = y;
          z.push_back(std::max(v, xt));
          cands.push_back(std::move(z));
        }
      }
      if (cands.empty()) fail(Errc::projection_failed, "epigraph projection found no finite point");
      keep_best_candidates(cands, x);
      return cands;
    }
    case SetKind::kConstraintSystem: {
      if (set_contains(S, x)) return {x};
      std::vector<Vec> cands;
      for (const auto& start : multistart_points(x, std::max(1.0, norm2(x) / 8.0))) {
        Vec y = start;
        if (set_residual(S, y) > 1e3) {  // reach sane scales first
          LogViolationObjective pre;
          pre.S = &S;
          y = descend(pre, y, 160);
        }
        PenaltyObjective obj;
        obj.S = &S;
        obj.x = x;
        for (double mu = 64.0; mu <= 1e13; mu *= 32.0) {
          obj.mu = mu;
          y = descend(obj, y, 120);
          if (set_violation_scaled(S, y) <= 1e-11) break;
        }
        gauss_newton_restore(S, y);
        if (set_violation_scaled(S, y) <= 1e-7) cands.push_back(std::move(y));
      }
      if (cands.empty())
        fail(Errc::projection_failed, "penalty descent did not reach the constraint set");
      keep_best_candidates(cands, x);
      return cands;
    }
    case SetKind::kProduct: {
      const auto y1 = project(*S.s1, head_of(x, S.s1->dim));
      const auto y2 = project(*S.s2, Vec(x.begin() + S.s1->dim, x.end()));
      std::vector<Vec> out;
      for (const auto& a : y1)
        for (const auto& b : y2) {
          Vec y = a;
          y.insert(y.end(), b.begin(), b.end());
          out.push_back(std::move(y));
        }
      keep_best_candidates(out, x);
      return out;
    }
  }
  fail(Errc::projection_failed, "unknown set kind");
}

double set_distance(const SetSpec& S, const Vec& x) {
  const auto ys = project(S, x);
  double d = kPlusInf;
  for (const auto& y : ys) d = std::min(d, dist2(x, y));
  return d;
}

// --- pointwise normal cones --------------------------------------------------

LimitSet normal_cone_at(const SetSpec& S, const Vec& x) {
  if (!set_contains(S, x, kMemberTol))
    fail(Errc::not_in_set, "normal_cone_at requires a point of the set");
  LimitSet L = LimitSet::zero_cone(S.dim);
  L.convex = true;
  const double scale_tol = 1e-6 * (1.0 + norm2(x));
  switch (S.kind) {
    case SetKind::kWhole:
      return L;
    case SetKind::kHalfspace:
      if (std::fabs(dot(S.a, x) - S.b) <= scale_tol * norm2(S.a)) L.rays.push_back(normalized(S.a));
      L.normalize();
      return L;
    case SetKind::kBall:
      if (std::fabs(dist2(x, S.center) - S.radius) <= scale_tol)
        L.rays.push_back(normalized(sub(x, S.center)));
      L.normalize();
      return L;
    case SetKind::kPolyhedron: {
      for (std::size_t i = 0; i < S.A.size(); ++i)
        if (std::fabs(dot(S.A[i], x) - S.bvec[i]) <= scale_tol * std::max(norm2(S.A[i]), 1e-12))
          L.rays.push_back(normalized(S.A[i]));
      L.normalize();
      return L;
    }
    case SetKind::kGraph: {
      const Vec rest = drop_coord(x, S.graph_coord);
      std::vector<Vec> grads;
      try {
        grads = selection_gradients(*S.graph_phi, rest);
      } catch (const Error&) {
        const GradResult g = try_gradient(*S.graph_phi, rest, /*strict_underflow=*/false);
        if (g.in_domain) grads.push_back(g.grad);
      }
      for (const auto& gphi : grads)
        L.rays.push_back(normalized(insert_coord(gphi, S.graph_coord, -1.0)));
      L.normalize();
      return L;
    }
    case SetKind::kConstraintSystem: {
      auto gradients_of = [&](const FunctionSpec& fn) {
        try {
          return selection_gradients(fn, x);
        } catch (const Error&) {
          const GradResult g = try_gradient(fn, x, /*strict_underflow=*/false);
          return g.in_domain ? std::vector<Vec>{g.grad} : std::vector<Vec>{};
        }
      };
      for (const auto& gi : S.g) {
        const double v = evaluate(gi, x);
        if (std::fabs(v) > scale_tol) continue;
        for (const auto& gr : gradients_of(gi))
          if (norm2(gr) > 1e-10) L.rays.push_back(normalized(gr));
      }
      for (const auto& hj : S.h) {
        for (const auto& gr : gradients_of(hj)) {
          if (norm2(gr) > 1e-10) {
            L.rays.push_back(normalized(gr));
            L.rays.push_back(normalized(scaled(gr, -1.0)));
          }
        }
      }
      L.normalize();
      return L;
    }
    case SetKind::kEpigraph: {
      // Sampled via the projection characterization in a shrinking ball.
      L.convex = false;
      RecurrenceTracker tracker(0.02, false);
      for (int level = 0; level < 4; ++level) {
        const double eps = 0.5 / std::pow(4.0, level);
        const auto dirs = sphere_directions(S.dim, 24, 0, level);
        for (const auto& d : dirs) {
          Vec probe = x;
          axpy(eps, d, probe);
          for (const auto& y : project(S, probe)) {
            const double dd = dist2(probe, y);
            if (dd <= 1e-9 * eps) continue;
            tracker.add(level, normalized(sub(probe, y)));
          }
        }
      }
      L.rays = tracker.accepted(3, 2);
      L.normalize();
      return L;
    }
    case SetKind::kProduct: {
      const auto L1 = normal_cone_at(*S.s1, head_of(x, S.s1->dim));
      const auto L2 = normal_cone_at(*S.s2, Vec(x.begin() + S.s1->dim, x.end()));
      for (const auto& r : L1.rays) {
        Vec rr = r;
        rr.resize(S.dim, 0.0);
        L.rays.push_back(std::move(rr));
      }
      for (const auto& r : L2.rays) {
        Vec rr = zeros(S.s1->dim);
        rr.insert(rr.end(), r.begin(), r.end());
        L.rays.push_back(std::move(rr));
      }
      L.normalize();
      return L;
    }
  }
  return L;
}

// --- parsing ----------------------------------------------------------------

namespace {

std::vector<std::string> split_top_level(const std::string& s, char sep) {
  std::vector<std::string> out;
  int depth = 0;
  std::string cur;
  for (char c : s) {
    if (c == '(' || c == '{') ++depth;
    if (c == ')' || c == '}') --depth;
    if (c == sep && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  std::size_t b = s.find_last_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

// Find a top-level relation operator; returns {pos, op} with op in {<=,>=,=}.
std::optional<std::pair<std::size_t, std::string>> find_relation(const std::string& s) {
  int depth = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c == '(' || c == '{') ++depth;
    if (c == ')' || c == '}') --depth;
    if (depth != 0) continue;
    if (c == '<' && i + 1 < s.size() && s[i + 1] == '=') return {{i, "<="}};
    if (c == '>' && i + 1 < s.size() && s[i + 1] == '=') return {{i, ">="}};
    if (c == '=' && (i == 0 || (s[i - 1] != '<' && s[i - 1] != '>' && s[i - 1] != '=')) &&
        (i + 1 >= s.size() || s[i + 1] != '='))
      return {{i, "="}};
  }
  return std::nullopt;
}

NodePtr sub_nodes(NodePtr a, NodePtr b) {
  ExprNode n;
  n.kind = NodeKind::kSub;
  n.kids = {std::move(a), std::move(b)};
  return std::make_shared<const ExprNode>(std::move(n));
}

// Detect ball form norm(x1-c1, ..., xn-cn) - r  (allowing bare xk terms).
std::optional<SetSpec> detect_ball(const FunctionSpec& gfn, int dim) {
  const ExprNode& root = *gfn.root;
  if (root.kind != NodeKind::kSub) return std::nullopt;
  const ExprNode* nrm = root.kids[0].get();
  const ExprNode* cst = root.kids[1].get();
  if (nrm->kind != NodeKind::kNorm || cst->kind != NodeKind::kConstant) return std::nullopt;
  if (static_cast<int>(nrm->kids.size()) != dim) return std::nullopt;
  Vec center(dim, 0.0);
  std::vector<bool> seen(dim, false);
  for (const auto& kid : nrm->kids) {
    int var = -1;
    double c = 0.0;
    if (kid->kind == NodeKind::kVar) {
      var = kid->var;
    } else if (kid->kind == NodeKind::kSub && kid->kids[0]->kind == NodeKind::kVar &&
               kid->kids[1]->kind == NodeKind::kConstant) {
      var = kid->kids[0]->var;
      c = kid->kids[1]->value;
    } else {
      return std::nullopt;
    }
    if (var < 0 || var >= dim || seen[var]) return std::nullopt;
    seen[var] = true;
    center[var] = c;
  }
  if (cst->value <= 0) return std::nullopt;
  return make_ball(center, cst->value);
}

NodePtr remap_vars_skipping(const NodePtr& node, int skip_var) {
  ExprNode n = *node;
  if (n.kind == NodeKind::kVar) {
    if (n.var == skip_var)
      fail(Errc::semantic_error, "graph expression may not reference the graph coordinate");
    if (n.var > skip_var) --n.var;
  }
  for (auto& kid : n.kids) kid = remap_vars_skipping(kid, skip_var);
  return std::make_shared<const ExprNode>(std::move(n));
}

}  // namespace

SetSpec parse_set(const std::string& raw, int dim) {
  std::string text = trim(raw);
  if (text.rfind("set", 0) == 0) {
    const std::size_t open = text.find('{');
    const std::size_t close = text.rfind('}');
    if (open == std::string::npos || close == std::string::npos || close < open)
      fail(Errc::syntax_error, "malformed set block");
    text = text.substr(open + 1, close - open - 1);
  }
  text = trim(text);
  if (text.empty() || text == "whole") return make_whole(dim);

  std::vector<FunctionSpec> g, h;
  std::optional<SetSpec> graph_set;
  for (std::string item : split_top_level(text, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    std::string tag;
    if (item.rfind("g:", 0) == 0) {
      tag = "g";
      item = trim(item.substr(2));
    } else if (item.rfind("h:", 0) == 0) {
      tag = "h";
      item = trim(item.substr(2));
    } else if (item.rfind("graph:", 0) == 0) {
      tag = "graph";
      item = trim(item.substr(6));
    }
    if (item.empty()) continue;
    const auto rel = find_relation(item);
    if (!rel) fail(Errc::syntax_error, "set item needs a relation: '" + item + "'");
    const std::string lhs = trim(item.substr(0, rel->first));
    const std::string rhs = trim(item.substr(rel->first + rel->second.size()));
    if (tag == "graph") {
      if (rel->second != "=") fail(Errc::syntax_error, "graph item must be an equation");
      if (lhs.size() < 2 || lhs[0] != 'x')
        fail(Errc::syntax_error, "graph item must read 'xK = expr'");
      const int coord = std::stoi(lhs.substr(1));
      NodePtr body = parse_expression_raw(rhs, dim);
      body = remap_vars_skipping(body, coord - 1);
      graph_set = make_graph(dim, coord, make_from_root(body, dim - 1));
      continue;
    }
    NodePtr l = parse_expression_raw(lhs, dim);
    NodePtr r = parse_expression_raw(rhs, dim);
    NodePtr diff = rel->second == ">=" ? sub_nodes(r, l) : sub_nodes(l, r);
    FunctionSpec fn = make_from_root(diff, dim);
    if (rel->second == "=" && tag != "g")
      h.push_back(std::move(fn));
    else
      g.push_back(std::move(fn));
  }
  if (graph_set) {
    if (!g.empty() || !h.empty())
      fail(Errc::semantic_error, "graph sets cannot be mixed with other constraints");
    return *graph_set;
  }
  if (g.empty() && h.empty()) return make_whole(dim);
  if (g.size() == 1 && h.empty()) {
    if (auto ball = detect_ball(g[0], dim)) return *ball;
  }
  if (h.empty()) {
    std::vector<Vec> A;
    Vec b;
    bool all_affine = true;
    for (const auto& gi : g) {
      if (auto aff = as_affine(gi)) {
        A.push_back(aff->first);
        b.push_back(-aff->second);
      } else {
        all_affine = false;
        break;
      }
    }
    if (all_affine) {
      if (A.size() == 1) return make_halfspace(A[0], b[0]);
      return make_polyhedron(std::move(A), std::move(b));
    }
  }
  return make_constraint_system(std::move(g), std::move(h));
}

std::string to_string(const SetSpec& S) {
  std::ostringstream os;
  switch (S.kind) {
    case SetKind::kWhole:
      return "set { whole }";
    case SetKind::kHalfspace: {
      os << "set { g: ";
      for (int j = 0; j < S.dim; ++j) {
        if (j) os << " + ";
        os << S.a[j] << "*x" << (j + 1);
      }
      os << " <= " << S.b << "; }";
      return os.str();
    }
    case SetKind::kBall:
      os << "set { g: norm(";
      for (int j = 0; j < S.dim; ++j) {
        if (j) os << ",";
        os << "x" << (j + 1) << "-" << S.center[j];
      }
      os << ") <= " << S.radius << "; }";
      return os.str();
    case SetKind::kPolyhedron: {
      os << "set { ";
      for (std::size_t i = 0; i < S.A.size(); ++i) {
        os << "g: ";
        for (int j = 0; j < S.dim; ++j) {
          if (j) os << " + ";
          os << S.A[i][j] << "*x" << (j + 1);
        }
        os << " <= " << S.bvec[i] << "; ";
      }
      os << "}";
      return os.str();
    }
    case SetKind::kConstraintSystem: {
      os << "set { ";
      for (const auto& gi : S.g) os << "g: " << to_string(gi) << " <= 0; ";
      for (const auto& hj : S.h) os << "h: " << to_string(hj) << " = 0; ";
      os << "}";
      return os.str();
    }
    case SetKind::kGraph:
      os << "set { graph: x" << (S.graph_coord + 1) << " = " << to_string(*S.graph_phi) << "; }";
      return os.str();
    case SetKind::kEpigraph:
      os << "set { g: " << to_string(*S.epi_f) << " <= x" << S.dim << "; }";
      return os.str();
    case SetKind::kProduct:
      return "product(" + to_string(*S.s1) + ", " + to_string(*S.s2) + ")";
  }
  return "set {}";
}

nlohmann::json to_json(const SetSpec& S) {
  nlohmann::json j;
  j["dim"] = S.dim;
  j["text"] = to_string(S);
  return j;
}

namespace {

// Inequalities must hold with the exact floating-point sign; equalities get a
// small tolerance.  Keeps asymptotically-touching systems out.
bool strictly_feasible(const SetSpec& S, const Vec& x) {
  switch (S.kind) {
    case SetKind::kWhole:
      return true;
    case SetKind::kHalfspace:
      return dot(S.a, x) - S.b <= 0.0;
    case SetKind::kBall:
      return dist2(x, S.center) - S.radius <= 0.0;
    case SetKind::kPolyhedron: {
      for (std::size_t i = 0; i < S.A.size(); ++i)
        if (dot(S.A[i], x) - S.bvec[i] > 0.0) return false;
      return true;
    }
    case SetKind::kConstraintSystem: {
      for (const auto& gi : S.g) {
        const double v = evaluate(gi, x);
        if (!std::isfinite(v) || v > 0.0) return false;
      }
      for (const auto& hj : S.h) {
        const double v = evaluate(hj, x);
        if (!std::isfinite(v) || std::fabs(v) > 1e-8) return false;
      }
      return true;
    }
    case SetKind::kGraph:
      return set_residual(S, x) <= 1e-8;
    case SetKind::kEpigraph: {
      const double v = evaluate(*S.epi_f, head_of(x, S.dim - 1));
      return std::isfinite(v) && v - x[S.dim - 1] <= 0.0;
    }
    case SetKind::kProduct:
      return strictly_feasible(*S.s1, head_of(x, S.s1->dim)) &&
             strictly_feasible(*S.s2, Vec(x.begin() + S.s1->dim, x.end()));
  }
  return false;
}

// Push a near-feasible point into the (exact-sign) feasible region along the
// steepest descent of the largest inequality violations.
void interior_push(const SetSpec& S, Vec& y) {
  if (S.kind != SetKind::kConstraintSystem) return;
  for (int it = 0; it < 40 && !strictly_feasible(S, y); ++it) {
    Vec dir = zeros(S.dim);
    for (const auto& gi : S.g) {
      const GradResult r = try_gradient(gi, y, /*strict_underflow=*/false);
      if (!r.in_domain) return;
      if (r.value > -1e-9) axpy(1.0, r.grad, dir);
    }
    const double n = norm2(dir);
    if (n < 1e-14) return;
    bool moved = false;
    for (double t : {1e-6, 1e-4, 1e-2, 1.0}) {
      Vec cand = y;
      axpy(-t / n, dir, cand);
      if (set_residual(S, cand) <= set_residual(S, y) + 1e-15) {
        y = cand;
        moved = true;
        if (strictly_feasible(S, y)) return;
      }
    }
    if (!moved) return;
  }
}

}  // namespace

std::optional<Vec> find_feasible_point(const SetSpec& S, double box) {
  std::vector<Vec> starts;
  starts.push_back(zeros(S.dim));
  for (int j = 0; j < S.dim; ++j)
    for (double s : {1.0, -1.0, 4.0, -4.0, 16.0, -16.0, box, -box})
      starts.push_back(unit(S.dim, j, s));
  for (int i = 0; i < 16; ++i) starts.push_back(probe_point(S.dim, i, box / 2));
  for (const auto& s0 : starts) {
    if (strictly_feasible(S, s0)) return s0;
    std::vector<Vec> cands;
    try {
      cands = project(S, s0);
    } catch (const Error&) {
      continue;
    }
    for (Vec y : cands) {
      interior_push(S, y);
      if (strictly_feasible(S, y)) return y;
    }
  }
  return std::nullopt;
}

}  // namespace horizon
