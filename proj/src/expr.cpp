#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "horizon/expr.hpp"
#include "horizon/lp.hpp"
#include "horizon/sets.hpp"

namespace horizon {
namespace {

NodePtr mk(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

NodePtr constant(double v) {
  ExprNode n;
  n.kind = NodeKind::kConstant;
  n.value = v;
  return mk(std::move(n));
}

NodePtr binary(NodeKind k, NodePtr a, NodePtr b) {
  ExprNode n;
  n.kind = k;
  n.kids = {std::move(a), std::move(b)};
  return mk(std::move(n));
}

constexpr double kGuardTol = 1e-8;
constexpr std::size_t kMaxSelections = 64;
constexpr std::size_t kMaxPieces = 128;

// Relative-only tolerance: scale-free slack so that points exponentially
// close to a facet stay on their true side (e.g. e^-500 is NOT "on" {y<=0}).
bool guard_holds(const Guard& g, const Vec& x, double tol = 1e-12) {
  for (const auto& ineq : g) {
    const double lhs = dot(ineq.a, x);
    if (lhs > ineq.b + tol * (std::fabs(ineq.b) + std::fabs(lhs))) return false;
  }
  return true;
}

struct EvalResult {
  double v = 0.0;
  bool ok = false;  // ok implies v is finite
};

EvalResult eval_node(const ExprNode& n, const Vec& x);

EvalResult finite_or_fail(double v) {
  if (!std::isfinite(v)) return {0.0, false};
  return {v, true};
}

EvalResult eval_node(const ExprNode& n, const Vec& x) {
  switch (n.kind) {
    case NodeKind::kConstant:
      return finite_or_fail(n.value);
    case NodeKind::kVar:
      return finite_or_fail(x[n.var]);
    case NodeKind::kAdd: {
      auto a = eval_node(*n.kids[0], x), b = eval_node(*n.kids[1], x);
      if (!a.ok || !b.ok) return {0, false};
      return finite_or_fail(a.v + b.v);
    }
    case NodeKind::kSub: {
      auto a = eval_node(*n.kids[0], x), b = eval_node(*n.kids[1], x);
      if (!a.ok || !b.ok) return {0, false};
      return finite_or_fail(a.v - b.v);
    }
    case NodeKind::kMul: {
      auto a = eval_node(*n.kids[0], x), b = eval_node(*n.kids[1], x);
      if (!a.ok || !b.ok) return {0, false};
      return finite_or_fail(a.v * b.v);
    }
    case NodeKind::kDiv: {
      auto a = eval_node(*n.kids[0], x), b = eval_node(*n.kids[1], x);
      if (!a.ok || !b.ok || b.v == 0.0) return {0, false};
      return finite_or_fail(a.v / b.v);
    }
    case NodeKind::kPow: {
      auto a = eval_node(*n.kids[0], x);
      if (!a.ok) return {0, false};
      double v = 1.0;
      for (int i = 0; i < n.power; ++i) v *= a.v;
      return finite_or_fail(v);
    }
    case NodeKind::kExp: {
      auto a = eval_node(*n.kids[0], x);
      if (!a.ok) return {0, false};
      return finite_or_fail(std::exp(a.v));
    }
    case NodeKind::kLog: {
      auto a = eval_node(*n.kids[0], x);
      if (!a.ok || a.v <= 0.0) return {0, false};
      return finite_or_fail(std::log(a.v));
    }
    case NodeKind::kAbs: {
      auto a = eval_node(*n.kids[0], x);
      if (!a.ok) return {0, false};
      return finite_or_fail(std::fabs(a.v));
    }
    case NodeKind::kSqrt: {
      auto a = eval_node(*n.kids[0], x);
      if (!a.ok || a.v < 0.0) return {0, false};
      return finite_or_fail(std::sqrt(a.v));
    }
    case NodeKind::kNorm: {
      double s = 0.0;
      for (const auto& kid : n.kids) {
        auto a = eval_node(*kid, x);
        if (!a.ok) return {0, false};
        s += a.v * a.v;
      }
      return finite_or_fail(std::sqrt(s));
    }
    case NodeKind::kMax: {
      auto a = eval_node(*n.kids[0], x), b = eval_node(*n.kids[1], x);
      if (!a.ok || !b.ok) return {0, false};  // max(c, +inf) = +inf
      return finite_or_fail(std::max(a.v, b.v));
    }
    case NodeKind::kMin: {
      auto a = eval_node(*n.kids[0], x), b = eval_node(*n.kids[1], x);
      if (a.ok && b.ok) return finite_or_fail(std::min(a.v, b.v));
      if (a.ok) return a;
      if (b.ok) return b;
      return {0, false};
    }
    case NodeKind::kPiecewise: {
      // On shared guard facets the piece attaining the minimum defines f.
      EvalResult best{0, false};
      for (std::size_t i = 0; i < n.guards.size(); ++i) {
        if (!guard_holds(n.guards[i], x)) continue;
        auto piece = eval_node(*n.kids[i], x);
        if (!piece.ok) continue;
        if (!best.ok || piece.v < best.v) best = piece;
      }
      return best;
    }
    case NodeKind::kIndicator:
      return set_contains(*n.set, x) ? EvalResult{0.0, true} : EvalResult{0, false};
    case NodeKind::kCompose: {
      Vec y(n.kids.size());
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        auto a = eval_node(*n.kids[i], x);
        if (!a.ok) return {0, false};
        y[i] = a.v;
      }
      const double v = evaluate(*n.outer, y);
      return std::isfinite(v) ? EvalResult{v, true} : EvalResult{0, false};
    }
  }
  return {0, false};
}

// --- forward-mode dual with kink-selection enumeration ----------------------

struct Dual {
  double v = 0.0;
  Vec g;
  bool uf = false;  // value lost to underflow (e.g. exp of a large negative)
};

struct SelResult {
  std::vector<Dual> sel;  // all active smooth selections; empty = off domain
  bool enumerable = true;
  bool kink = false;  // more than one selection somewhere below
};

SelResult fail_sel() {
  SelResult r;
  r.enumerable = false;
  return r;
}

SelResult off_domain() { return SelResult{}; }

using Combine = Dual (*)(const Dual&, const Dual&);

SelResult combine2(const SelResult& a, const SelResult& b, const Combine& f) {
  if (!a.enumerable || !b.enumerable) return fail_sel();
  if (a.sel.empty() || b.sel.empty()) return off_domain();
  SelResult r;
  r.kink = a.kink || b.kink;
  for (const auto& da : a.sel)
    for (const auto& db : b.sel) {
      Dual d = f(da, db);
      d.uf = da.uf || db.uf;
      r.sel.push_back(std::move(d));
      if (r.sel.size() > kMaxSelections) return fail_sel();
    }
  return r;
}

SelResult map1(const SelResult& a, double (*fv)(double), double (*fd)(double)) {
  if (!a.enumerable) return fail_sel();
  SelResult r;
  r.kink = a.kink;
  for (const auto& da : a.sel) {
    const double v = fv(da.v);
    const double d = fd(da.v);
    if (!std::isfinite(v) || !std::isfinite(d)) return off_domain();
    r.sel.push_back(Dual{v, scaled(da.g, d), da.uf});
  }
  return r;
}

void dedupe_selections(SelResult& r) {
  std::vector<Dual> out;
  for (auto& d : r.sel) {
    bool dup = false;
    for (const auto& o : out)
      if (dist2(o.g, d.g) <= 1e-12 && std::fabs(o.v - d.v) <= 1e-12) dup = true;
    if (!dup) out.push_back(std::move(d));
  }
  r.sel = std::move(out);
}

SelResult sel_node(const ExprNode& n, const Vec& x, double kink_tol, bool strict_underflow);

SelResult sel_node(const ExprNode& n, const Vec& x, double kink_tol, bool strict_underflow) {
  const std::size_t dim = x.size();
  switch (n.kind) {
    case NodeKind::kConstant: {
      SelResult r;
      r.sel.push_back(Dual{n.value, zeros(dim)});
      return r;
    }
    case NodeKind::kVar: {
      SelResult r;
      r.sel.push_back(Dual{x[n.var], unit(dim, n.var)});
      return r;
    }
    case NodeKind::kAdd:
      return combine2(sel_node(*n.kids[0], x, kink_tol, strict_underflow), sel_node(*n.kids[1], x, kink_tol, strict_underflow),
                      +[](const Dual& a, const Dual& b) { return Dual{a.v + b.v, add(a.g, b.g)}; });
    case NodeKind::kSub:
      return combine2(sel_node(*n.kids[0], x, kink_tol, strict_underflow), sel_node(*n.kids[1], x, kink_tol, strict_underflow),
                      +[](const Dual& a, const Dual& b) { return Dual{a.v - b.v, sub(a.g, b.g)}; });
    case NodeKind::kMul:
      return combine2(sel_node(*n.kids[0], x, kink_tol, strict_underflow), sel_node(*n.kids[1], x, kink_tol, strict_underflow),
                      +[](const Dual& a, const Dual& b) {
                        Vec g = scaled(a.g, b.v);
                        axpy(a.v, b.g, g);
                        return Dual{a.v * b.v, std::move(g)};
                      });
    case NodeKind::kDiv: {
      auto b = sel_node(*n.kids[1], x, kink_tol, strict_underflow);
      if (!b.enumerable) return fail_sel();
      for (const auto& db : b.sel)
        if (db.v == 0.0) return off_domain();  // covers underflowed zeros too
      return combine2(sel_node(*n.kids[0], x, kink_tol, strict_underflow), b,
                      +[](const Dual& a, const Dual& bb) {
                        Vec g = scaled(a.g, 1.0 / bb.v);
                        axpy(-a.v / (bb.v * bb.v), bb.g, g);
                        return Dual{a.v / bb.v, std::move(g)};
                      });
    }
    case NodeKind::kPow: {
      auto a = sel_node(*n.kids[0], x, kink_tol, strict_underflow);
      if (!a.enumerable) return fail_sel();
      SelResult r;
      r.kink = a.kink;
      for (const auto& da : a.sel) {
        double v = 1.0;
        for (int i = 0; i < n.power; ++i) v *= da.v;
        double dpow = 0.0;
        if (n.power > 0) {
          dpow = n.power;
          for (int i = 0; i < n.power - 1; ++i) dpow *= da.v;
        }
        if (!std::isfinite(v) || !std::isfinite(dpow)) return off_domain();
        r.sel.push_back(Dual{v, scaled(da.g, dpow)});
      }
      return r;
    }
    case NodeKind::kExp: {
      auto a = sel_node(*n.kids[0], x, kink_tol, strict_underflow);
      if (!a.enumerable) return fail_sel();
      SelResult r;
      r.kink = a.kink;
      for (const auto& da : a.sel) {
        const double v = std::exp(da.v);
        if (!std::isfinite(v)) return off_domain();
        // exact-zero from a finite argument is underflow: flag it so that
        // consumers which distinguish 0 from 0+ can reject the sample
        if (v == 0.0) {
          r.sel.push_back(Dual{0.0, zeros(x.size()), true});
          continue;
        }
        r.sel.push_back(Dual{v, scaled(da.g, v), da.uf});
      }
      return r;
    }
    case NodeKind::kLog: {
      auto a = sel_node(*n.kids[0], x, kink_tol, strict_underflow);
      if (!a.enumerable) return fail_sel();
      for (const auto& da : a.sel) {
        if (strict_underflow && da.uf && da.v == 0.0) return off_domain();
        if (da.v <= 0.0) return off_domain();
      }
      return map1(a, +[](double v) { return std::log(v); }, +[](double v) { return 1.0 / v; });
    }
    case NodeKind::kSqrt: {
      auto a = sel_node(*n.kids[0], x, kink_tol, strict_underflow);
      if (!a.enumerable) return fail_sel();
      for (const auto& da : a.sel) {
        if (strict_underflow && da.uf && da.v == 0.0) return off_domain();
        if (da.v < 0.0) return off_domain();
      }
      for (const auto& da : a.sel)
        if (da.v == 0.0) return fail_sel();  // boundary kink, not enumerable
      return map1(a, +[](double v) { return std::sqrt(v); },
                  +[](double v) { return 0.5 / std::sqrt(v); });
    }
    case NodeKind::kAbs: {
      auto a = sel_node(*n.kids[0], x, kink_tol, strict_underflow);
      if (!a.enumerable) return fail_sel();
      if (a.sel.empty()) return off_domain();
      SelResult r;
      r.kink = a.kink;
      for (const auto& da : a.sel) {
        if (std::fabs(da.v) <= kink_tol * (1.0 + std::fabs(da.v))) {
          r.kink = true;
          r.sel.push_back(Dual{std::fabs(da.v), da.g});
          r.sel.push_back(Dual{std::fabs(da.v), scaled(da.g, -1.0)});
        } else {
          r.sel.push_back(Dual{std::fabs(da.v), da.v > 0 ? da.g : scaled(da.g, -1.0)});
        }
        if (r.sel.size() > kMaxSelections) return fail_sel();
      }
      return r;
    }
    case NodeKind::kNorm: {
      std::vector<SelResult> parts;
      for (const auto& kid : n.kids) parts.push_back(sel_node(*kid, x, kink_tol, strict_underflow));
      // single-selection fast path only; norms of kinky arguments are rare
      Vec vals;
      std::vector<Vec> grads;
      for (auto& p : parts) {
        if (!p.enumerable) return fail_sel();
        if (p.sel.empty()) return off_domain();
        if (p.sel.size() > 1) return fail_sel();
        vals.push_back(p.sel[0].v);
        grads.push_back(p.sel[0].g);
      }
      const double nv = norm2(vals);
      if (nv <= kink_tol) return fail_sel();  // ball subdifferential, not enumerable
      Vec g = zeros(dim);
      for (std::size_t i = 0; i < vals.size(); ++i) axpy(vals[i] / nv, grads[i], g);
      SelResult r;
      r.sel.push_back(Dual{nv, std::move(g)});
      return r;
    }
    case NodeKind::kMax:
    case NodeKind::kMin: {
      auto a = sel_node(*n.kids[0], x, kink_tol, strict_underflow);
      auto b = sel_node(*n.kids[1], x, kink_tol, strict_underflow);
      if (!a.enumerable || !b.enumerable) return fail_sel();
      const bool is_max = n.kind == NodeKind::kMax;
      if (a.sel.empty() && b.sel.empty()) return off_domain();
      if (a.sel.empty() || b.sel.empty()) {
        if (is_max) return off_domain();  // max(c, +inf) = +inf
        return a.sel.empty() ? b : a;
      }
      const double av = a.sel[0].v, bv = b.sel[0].v;
      const double tol = kink_tol * (1.0 + std::fabs(av) + std::fabs(bv));
      SelResult r;
      r.kink = a.kink || b.kink;
      if (std::fabs(av - bv) <= tol) {
        r.kink = true;
        for (const auto& d : a.sel) r.sel.push_back(d);
        for (const auto& d : b.sel) r.sel.push_back(d);
      } else if ((av > bv) == is_max) {
        r.sel = a.sel;
      } else {
        r.sel = b.sel;
      }
      if (r.sel.size() > kMaxSelections) return fail_sel();
      return r;
    }
    case NodeKind::kPiecewise: {
      // Active pieces: guard holds and piece value attains the minimum.
      std::vector<std::pair<std::size_t, SelResult>> active;
      double best = kPlusInf;
      for (std::size_t i = 0; i < n.guards.size(); ++i) {
        if (!guard_holds(n.guards[i], x)) continue;
        auto p = sel_node(*n.kids[i], x, kink_tol, strict_underflow);
        if (!p.enumerable) return fail_sel();
        if (p.sel.empty()) continue;
        best = std::min(best, p.sel[0].v);
        active.emplace_back(i, std::move(p));
      }
      if (active.empty()) return off_domain();
      SelResult r;
      std::size_t n_active = 0;
      for (auto& [i, p] : active) {
        (void)i;
        if (p.sel[0].v > best + kink_tol * (1.0 + std::fabs(best))) continue;
        ++n_active;
        r.kink = r.kink || p.kink;
        for (const auto& d : p.sel) r.sel.push_back(d);
        if (r.sel.size() > kMaxSelections) return fail_sel();
      }
      if (n_active > 1) r.kink = true;
      // Interior-vs-facet: treat proximity to any guard boundary as a kink so
      // gradient_exact refuses piece boundaries even when a single piece wins.
      for (std::size_t i = 0; i < n.guards.size(); ++i) {
        for (const auto& ineq : n.guards[i]) {
          const double slack = dot(ineq.a, x) - ineq.b;
          if (std::fabs(slack) <= kink_tol * (1.0 + std::fabs(ineq.b))) r.kink = true;
        }
      }
      return r;
    }
    case NodeKind::kIndicator: {
      if (!set_contains(*n.set, x)) return off_domain();
      SelResult r;
      r.sel.push_back(Dual{0.0, zeros(dim)});
      if (!set_interior_contains(*n.set, x)) r.kink = true;
      return r;
    }
    case NodeKind::kCompose: {
      std::vector<SelResult> parts;
      for (const auto& kid : n.kids) parts.push_back(sel_node(*kid, x, kink_tol, strict_underflow));
      std::vector<std::vector<Dual>> flat{{Dual{0.0, zeros(dim)}}};
      // cartesian combinations of kid selections
      std::vector<std::vector<Dual>> combos{{}};
      for (auto& p : parts) {
        if (!p.enumerable) return fail_sel();
        if (p.sel.empty()) return off_domain();
        if (strict_underflow)
          for (const auto& d : p.sel)
            if (d.uf && d.v == 0.0) return off_domain();  // outer branch untrustworthy
        std::vector<std::vector<Dual>> next;
        for (const auto& c : combos)
          for (const auto& d : p.sel) {
            auto cc = c;
            cc.push_back(d);
            next.push_back(std::move(cc));
            if (next.size() > kMaxSelections) return fail_sel();
          }
        combos = std::move(next);
      }
      SelResult r;
      for (auto& p : parts) r.kink = r.kink || p.kink;
      for (const auto& combo : combos) {
        Vec y(combo.size());
        for (std::size_t i = 0; i < combo.size(); ++i) y[i] = combo[i].v;
        std::vector<Vec> outer_grads;
        try {
          outer_grads = selection_gradients(*n.outer, y);
        } catch (const Error& e) {
          // off-domain at the inner value is a domain miss, not a structural
          // failure; callers back off the radius rather than fall back
          if (e.code() == Errc::semantic_error) return off_domain();
          return fail_sel();
        }
        const double fy = evaluate(*n.outer, y);
        if (!std::isfinite(fy)) return off_domain();
        if (outer_grads.size() > 1) r.kink = true;
        for (const auto& og : outer_grads) {
          Vec g = zeros(dim);
          for (std::size_t i = 0; i < combo.size(); ++i) axpy(og[i], combo[i].g, g);
          r.sel.push_back(Dual{fy, std::move(g)});
          if (r.sel.size() > kMaxSelections) return fail_sel();
        }
      }
      return r;
    }
  }
  return fail_sel();
}

// --- tags -------------------------------------------------------------------

bool node_has(const ExprNode& n, NodeKind k) {
  if (n.kind == k) return true;
  for (const auto& kid : n.kids)
    if (node_has(*kid, k)) return true;
  if (n.kind == NodeKind::kCompose && n.outer && node_has(*n.outer->root, k)) return true;
  return false;
}

bool is_smooth_node(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::kAbs:
    case NodeKind::kMax:
    case NodeKind::kMin:
    case NodeKind::kPiecewise:
    case NodeKind::kIndicator:
    case NodeKind::kNorm:
      return false;
    case NodeKind::kCompose:
      if (!is_smooth_node(*n.outer->root)) return false;
      break;
    default:
      break;
  }
  for (const auto& kid : n.kids)
    if (!is_smooth_node(*kid)) return false;
  return true;
}

// Constant folding over closed-form subtrees; nullopt when variables occur.
std::optional<double> const_value(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::kConstant:
      return n.value;
    case NodeKind::kVar:
      return std::nullopt;
    case NodeKind::kAdd:
    case NodeKind::kSub:
    case NodeKind::kMul:
    case NodeKind::kDiv: {
      const auto a = const_value(*n.kids[0]);
      const auto b = const_value(*n.kids[1]);
      if (!a || !b) return std::nullopt;
      switch (n.kind) {
        case NodeKind::kAdd: return *a + *b;
        case NodeKind::kSub: return *a - *b;
        case NodeKind::kMul: return *a * *b;
        default: return *b == 0.0 ? std::nullopt : std::optional<double>(*a / *b);
      }
    }
    case NodeKind::kPow: {
      const auto a = const_value(*n.kids[0]);
      if (!a) return std::nullopt;
      double v = 1.0;
      for (int i = 0; i < n.power; ++i) v *= *a;
      return v;
    }
    case NodeKind::kAbs: {
      const auto a = const_value(*n.kids[0]);
      return a ? std::optional<double>(std::fabs(*a)) : std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

bool is_affine_node(const ExprNode& n) {
  if (const_value(n)) return true;
  switch (n.kind) {
    case NodeKind::kConstant:
    case NodeKind::kVar:
      return true;
    case NodeKind::kAdd:
    case NodeKind::kSub:
      return is_affine_node(*n.kids[0]) && is_affine_node(*n.kids[1]);
    case NodeKind::kMul:
      return (const_value(*n.kids[0]) && is_affine_node(*n.kids[1])) ||
             (const_value(*n.kids[1]) && is_affine_node(*n.kids[0]));
    case NodeKind::kDiv: {
      const auto d = const_value(*n.kids[1]);
      return d && *d != 0.0 && is_affine_node(*n.kids[0]);
    }
    case NodeKind::kPow:
      return n.power == 1 ? is_affine_node(*n.kids[0]) : n.power == 0;
    default:
      return false;
  }
}

bool is_convex_node(const ExprNode& n);
bool is_concave_node(const ExprNode& n);

bool is_convex_node(const ExprNode& n) {
  if (is_affine_node(n)) return true;
  switch (n.kind) {
    case NodeKind::kAdd:
      return is_convex_node(*n.kids[0]) && is_convex_node(*n.kids[1]);
    case NodeKind::kSub:
      return is_convex_node(*n.kids[0]) && is_concave_node(*n.kids[1]);
    case NodeKind::kMul:
      if (const auto c = const_value(*n.kids[0]))
        return *c >= 0 ? is_convex_node(*n.kids[1]) : is_concave_node(*n.kids[1]);
      if (const auto c = const_value(*n.kids[1]))
        return *c >= 0 ? is_convex_node(*n.kids[0]) : is_concave_node(*n.kids[0]);
      return false;
    case NodeKind::kMax:
      return is_convex_node(*n.kids[0]) && is_convex_node(*n.kids[1]);
    case NodeKind::kAbs:
    case NodeKind::kNorm:
      for (const auto& kid : n.kids)
        if (!is_affine_node(*kid)) return false;
      return true;
    case NodeKind::kExp:
      return is_convex_node(*n.kids[0]);
    case NodeKind::kPow:
      return n.power >= 2 && n.power % 2 == 0 && is_affine_node(*n.kids[0]);
    default:
      return false;
  }
}

bool is_concave_node(const ExprNode& n) {
  if (is_affine_node(n)) return true;
  switch (n.kind) {
    case NodeKind::kAdd:
      return is_concave_node(*n.kids[0]) && is_concave_node(*n.kids[1]);
    case NodeKind::kSub:
      return is_concave_node(*n.kids[0]) && is_convex_node(*n.kids[1]);
    case NodeKind::kMul:
      if (const auto c = const_value(*n.kids[0]))
        return *c >= 0 ? is_concave_node(*n.kids[1]) : is_convex_node(*n.kids[1]);
      if (const auto c = const_value(*n.kids[1]))
        return *c >= 0 ? is_concave_node(*n.kids[0]) : is_convex_node(*n.kids[0]);
      return false;
    case NodeKind::kMin:
      return is_concave_node(*n.kids[0]) && is_concave_node(*n.kids[1]);
    case NodeKind::kLog:
    case NodeKind::kSqrt:
      return is_affine_node(*n.kids[0]);
    default:
      return false;
  }
}

// --- piecewise-linear extraction --------------------------------------------

Guard conj(const Guard& a, const Guard& b) {
  Guard g = a;
  g.insert(g.end(), b.begin(), b.end());
  return g;
}

std::optional<std::vector<AffinePiece>> extract_pl(const ExprNode& n, int dim);

std::optional<std::vector<AffinePiece>> pl_binary(
    const ExprNode& n, int dim,
    const std::function<std::vector<AffinePiece>(const AffinePiece&, const AffinePiece&)>& fuse) {
  auto a = extract_pl(*n.kids[0], dim);
  auto b = extract_pl(*n.kids[1], dim);
  if (!a || !b) return std::nullopt;
  std::vector<AffinePiece> out;
  for (const auto& pa : *a)
    for (const auto& pb : *b) {
      auto fused = fuse(pa, pb);
      out.insert(out.end(), fused.begin(), fused.end());
      if (out.size() > kMaxPieces) return std::nullopt;
    }
  return out;
}

std::optional<std::vector<AffinePiece>> extract_pl(const ExprNode& n, int dim) {
  switch (n.kind) {
    case NodeKind::kConstant:
      return std::vector<AffinePiece>{AffinePiece{zeros(dim), n.value, {}}};
    case NodeKind::kVar:
      return std::vector<AffinePiece>{AffinePiece{unit(dim, n.var), 0.0, {}}};
    case NodeKind::kAdd:
      return pl_binary(n, dim, [](const AffinePiece& a, const AffinePiece& b) {
        return std::vector<AffinePiece>{
            AffinePiece{add(a.a, b.a), a.b + b.b, conj(a.domain, b.domain)}};
      });
    case NodeKind::kSub:
      return pl_binary(n, dim, [](const AffinePiece& a, const AffinePiece& b) {
        return std::vector<AffinePiece>{
            AffinePiece{sub(a.a, b.a), a.b - b.b, conj(a.domain, b.domain)}};
      });
    case NodeKind::kMul: {
      std::optional<double> c = const_value(*n.kids[0]);
      const ExprNode* e = n.kids[1].get();
      if (!c) {
        c = const_value(*n.kids[1]);
        e = n.kids[0].get();
      }
      if (!c) return std::nullopt;
      auto p = extract_pl(*e, dim);
      if (!p) return std::nullopt;
      for (auto& piece : *p) {
        piece.a = scaled(piece.a, *c);
        piece.b *= *c;
      }
      return p;
    }
    case NodeKind::kDiv: {
      const auto c = const_value(*n.kids[1]);
      if (!c || *c == 0.0) return std::nullopt;
      auto p = extract_pl(*n.kids[0], dim);
      if (!p) return std::nullopt;
      for (auto& piece : *p) {
        piece.a = scaled(piece.a, 1.0 / *c);
        piece.b /= *c;
      }
      return p;
    }
    case NodeKind::kPow:
      if (n.power == 1) return extract_pl(*n.kids[0], dim);
      if (n.power == 0)
        return std::vector<AffinePiece>{AffinePiece{zeros(dim), 1.0, {}}};
      return std::nullopt;
    case NodeKind::kAbs: {
      auto p = extract_pl(*n.kids[0], dim);
      if (!p) return std::nullopt;
      std::vector<AffinePiece> out;
      for (const auto& piece : *p) {
        Guard pos = piece.domain, neg = piece.domain;
        pos.push_back(AffineIneq{scaled(piece.a, -1.0), piece.b});   // a.x + b >= 0
        neg.push_back(AffineIneq{piece.a, -piece.b});                // a.x + b <= 0
        out.push_back(AffinePiece{piece.a, piece.b, pos});
        out.push_back(AffinePiece{scaled(piece.a, -1.0), -piece.b, neg});
      }
      if (out.size() > kMaxPieces) return std::nullopt;
      return out;
    }
    case NodeKind::kMax:
    case NodeKind::kMin: {
      const bool is_max = n.kind == NodeKind::kMax;
      return pl_binary(n, dim, [is_max](const AffinePiece& a, const AffinePiece& b) {
        // On a's winning region f = a, etc.
        const Vec d = sub(a.a, b.a);
        const double db = a.b - b.b;
        Guard ga = conj(a.domain, b.domain), gb = ga;
        if (is_max) {
          ga.push_back(AffineIneq{scaled(d, -1.0), db});  // a >= b
          gb.push_back(AffineIneq{d, -db});               // a <= b
        } else {
          ga.push_back(AffineIneq{d, -db});               // a <= b
          gb.push_back(AffineIneq{scaled(d, -1.0), db});  // a >= b
        }
        return std::vector<AffinePiece>{AffinePiece{a.a, a.b, ga}, AffinePiece{b.a, b.b, gb}};
      });
    }
    case NodeKind::kPiecewise: {
      std::vector<AffinePiece> out;
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        auto p = extract_pl(*n.kids[i], dim);
        if (!p) return std::nullopt;
        for (auto& piece : *p) {
          piece.domain = conj(piece.domain, n.guards[i]);
          out.push_back(std::move(piece));
        }
      }
      if (out.size() > kMaxPieces) return std::nullopt;
      return out;
    }
    default:
      return std::nullopt;
  }
}

// --- deterministic probe points ---------------------------------------------

double frac(double v) { return v - std::floor(v); }

Vec probe_point(int dim, int i, double scale) {
  Vec x(dim);
  for (int j = 0; j < dim; ++j)
    x[j] = scale * (2.0 * frac(0.5 + (i + 1) * frac(std::sqrt(2.0 + j) * 0.618033988749895)) - 1.0);
  return x;
}

void collect_guard_rows(const ExprNode& n, std::vector<AffineIneq>& rows) {
  if (n.kind == NodeKind::kPiecewise)
    for (const auto& g : n.guards)
      for (const auto& ineq : g) rows.push_back(ineq);
  for (const auto& kid : n.kids) collect_guard_rows(*kid, rows);
}

// Sampled lower-semicontinuity check.  A genuine violation means values
// diverge to -inf as probes approach a point where f is finite; the telltale
// is ring minima that keep DROPPING as the ring radius shrinks.
void validate_lsc(const FunctionSpec& f) {
  if (!node_has(*f.root, NodeKind::kPiecewise) && !node_has(*f.root, NodeKind::kLog)) return;
  std::vector<Vec> probes;
  for (int i = 0; i < 120; ++i) {
    const double scale = i % 3 == 0 ? 1.0 : (i % 3 == 1 ? 8.0 : 64.0);
    probes.push_back(probe_point(f.dim, i, scale));
  }
  // facet-targeted probes: points on each guard hyperplane
  std::vector<AffineIneq> rows;
  collect_guard_rows(*f.root, rows);
  for (const auto& row : rows) {
    const double nn = dot(row.a, row.a);
    if (nn < 1e-18) continue;
    const Vec base = scaled(row.a, row.b / nn);
    probes.push_back(base);
    for (int k = 0; k < 6; ++k) {
      Vec t = probe_point(f.dim, 100 + k, 4.0);
      axpy(-dot(t, row.a) / nn, row.a, t);  // tangential component
      probes.push_back(add(base, t));
    }
  }
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const Vec& x = probes[i];
    const double fx = evaluate(f, x);
    if (!std::isfinite(fx)) continue;
    auto ring_min = [&](double eps) {
      double m = kPlusInf;
      for (int k = 0; k < 10; ++k) {
        Vec y = x;
        axpy(eps, normalized(probe_point(f.dim, static_cast<int>(37 * i) + k + 1, 1.0)), y);
        m = std::min(m, evaluate(f, y));
      }
      return m;
    };
    const double m1 = ring_min(1e-2), m2 = ring_min(1e-4), m3 = ring_min(1e-6);
    if (m3 < m2 - 1.0 && m2 < m1 - 1.0 && m3 < fx - 1.0)
      fail(Errc::semantic_error,
           "values diverge to -inf near a point where f is finite; not lower semi-continuous");
  }
}

}  // namespace

double evaluate(const FunctionSpec& f, const Vec& x) {
  if (static_cast<int>(x.size()) != f.dim)
    fail(Errc::dimension_mismatch, "point dim " + std::to_string(x.size()) + " vs function dim " +
                                       std::to_string(f.dim));
  const EvalResult r = eval_node(*f.root, x);
  return r.ok ? r.v : kPlusInf;
}

bool in_domain(const FunctionSpec& f, const Vec& x) { return std::isfinite(evaluate(f, x)); }

GradResult try_gradient(const FunctionSpec& f, const Vec& x, bool strict_underflow) {
  GradResult out;
  SelResult r = sel_node(*f.root, x, 1e-12, strict_underflow);
  if (!r.enumerable || r.sel.empty()) {
    // retry with the looser kink tolerance only to report domain membership
    out.in_domain = in_domain(f, x);
    return out;
  }
  dedupe_selections(r);
  out.in_domain = true;
  out.value = r.sel[0].v;
  out.grad = r.sel[0].g;
  out.differentiable = !r.kink && r.sel.size() == 1 && all_finite(out.grad);
  return out;
}

Vec gradient_exact(const FunctionSpec& f, const Vec& x) {
  const GradResult g = try_gradient(f, x);
  if (!g.in_domain) fail(Errc::semantic_error, "point outside effective domain");
  if (!g.differentiable)
    fail(Errc::not_differentiable, "function is not differentiable at the given point");
  return g.grad;
}

std::vector<Vec> selection_gradients(const FunctionSpec& f, const Vec& x) {
  SelResult r = sel_node(*f.root, x, 1e-7, /*strict_underflow=*/true);
  if (!r.enumerable)
    fail(Errc::unsupported_class, "active gradient selections are not enumerable here");
  if (r.sel.empty()) fail(Errc::semantic_error, "point outside effective domain");
  dedupe_selections(r);
  std::vector<Vec> grads;
  for (const auto& d : r.sel)
    if (all_finite(d.g)) grads.push_back(d.g);
  if (grads.empty())
    fail(Errc::unsupported_class, "no finite gradient selection at the given point");
  std::sort(grads.begin(), grads.end(), lex_less);
  return grads;
}

bool domain_unbounded(const FunctionSpec& f) {
  // (a) finite samples found at every probe radius
  bool all_radii_hit = true;
  for (double radius : {8.0, 64.0, 512.0}) {
    bool hit = false;
    for (int i = 0; i < 64 && !hit; ++i) {
      Vec x = probe_point(f.dim, i, radius);
      if (in_domain(f, x)) hit = true;
    }
    for (int j = 0; j < f.dim && !hit; ++j) {
      if (in_domain(f, unit(f.dim, j, radius)) || in_domain(f, unit(f.dim, j, -radius))) hit = true;
    }
    if (!hit) all_radii_hit = false;
  }
  if (all_radii_hit) return true;
  // (b) an unbounded polyhedral guard with a finite piece
  if (f.pl_pieces) {
    for (const auto& piece : *f.pl_pieces) {
      std::vector<Vec> rows;
      for (const auto& ineq : piece.domain) rows.push_back(ineq.a);
      if (piece.domain.empty() || recession_cone_nontrivial(rows, f.dim)) return true;
    }
  }
  // (c) indicator of a set with escaping points: probe by projection
  if (f.root->kind == NodeKind::kIndicator) return set_projected_unbounded(*f.root->set);
  return false;
}

FunctionSpec make_from_root(NodePtr root, int dim, bool check_domain_unbounded) {
  FunctionSpec f;
  f.dim = dim;
  f.root = std::move(root);
  if (auto pl = extract_pl(*f.root, dim)) {
    f.pl_pieces = std::move(*pl);
    f.tags |= kTagPiecewiseLinear | kTagPiecewiseSmooth;
  }
  if (is_smooth_node(*f.root)) f.tags |= kTagSmooth;
  if (is_convex_node(*f.root)) f.tags |= kTagConvex;
  if (!node_has(*f.root, NodeKind::kIndicator)) f.tags |= kTagPiecewiseSmooth;
  if (node_has(*f.root, NodeKind::kIndicator) || node_has(*f.root, NodeKind::kLog) ||
      node_has(*f.root, NodeKind::kSqrt) || node_has(*f.root, NodeKind::kDiv) ||
      node_has(*f.root, NodeKind::kPiecewise))
    f.tags |= kTagExtendedValued;
  validate_lsc(f);
  if (check_domain_unbounded && !domain_unbounded(f))
    fail(Errc::semantic_error, "effective domain appears bounded");
  return f;
}

FunctionSpec make_constant(double c, int dim) {
  ExprNode n;
  n.kind = NodeKind::kConstant;
  n.value = c;
  return make_from_root(mk(std::move(n)), dim);
}

FunctionSpec make_affine(const Vec& a, double b) {
  const int dim = static_cast<int>(a.size());
  NodePtr e = constant(b);
  for (int j = 0; j < dim; ++j) {
    if (a[j] == 0.0) continue;
    ExprNode v;
    v.kind = NodeKind::kVar;
    v.var = j;
    e = binary(NodeKind::kAdd, e, binary(NodeKind::kMul, constant(a[j]), mk(std::move(v))));
  }
  return make_from_root(e, dim);
}

FunctionSpec make_sum(const FunctionSpec& f1, const FunctionSpec& f2) {
  if (f1.dim != f2.dim) fail(Errc::dimension_mismatch, "sum of functions with different dims");
  return make_from_root(binary(NodeKind::kAdd, f1.root, f2.root), f1.dim);
}

FunctionSpec make_scaled(const FunctionSpec& f, double lambda) {
  return make_from_root(binary(NodeKind::kMul, constant(lambda), f.root), f.dim);
}

FunctionSpec make_max(const FunctionSpec& f1, const FunctionSpec& f2) {
  return make_from_root(binary(NodeKind::kMax, f1.root, f2.root), f1.dim);
}

FunctionSpec make_min(const FunctionSpec& f1, const FunctionSpec& f2) {
  return make_from_root(binary(NodeKind::kMin, f1.root, f2.root), f1.dim);
}

FunctionSpec make_indicator(std::shared_ptr<const SetSpec> S) {
  ExprNode n;
  n.kind = NodeKind::kIndicator;
  const int dim = S->dim;
  n.set = std::move(S);
  return make_from_root(mk(std::move(n)), dim);
}

FunctionSpec make_compose(const FunctionSpec& outer, const std::vector<FunctionSpec>& inner) {
  if (static_cast<int>(inner.size()) != outer.dim)
    fail(Errc::dimension_mismatch, "composition arity mismatch");
  ExprNode n;
  n.kind = NodeKind::kCompose;
  n.outer = std::make_shared<const FunctionSpec>(outer);
  for (const auto& g : inner) n.kids.push_back(g.root);
  return make_from_root(mk(std::move(n)), inner.empty() ? 0 : inner[0].dim);
}

namespace {

NodePtr substitute_tail(const NodePtr& node, int keep_dim, const Vec& tail) {
  ExprNode n = *node;
  if (n.kind == NodeKind::kVar && n.var >= keep_dim) {
    return constant(tail[n.var - keep_dim]);
  }
  for (auto& kid : n.kids) kid = substitute_tail(kid, keep_dim, tail);
  for (auto& g : n.guards)
    for (auto& ineq : g) {
      double shift = 0.0;
      for (std::size_t j = keep_dim; j < ineq.a.size(); ++j) shift += ineq.a[j] * tail[j - keep_dim];
      ineq.a.resize(keep_dim);
      ineq.b -= shift;
    }
  return mk(std::move(n));
}

}  // namespace

FunctionSpec make_restriction(const FunctionSpec& f, int keep_dim, const Vec& tail) {
  if (keep_dim + static_cast<int>(tail.size()) != f.dim)
    fail(Errc::dimension_mismatch, "restriction tail does not match dimension");
  return make_from_root(substitute_tail(f.root, keep_dim, tail), keep_dim);
}

FunctionSpec make_tilted(const FunctionSpec& f, const Vec& u) {
  return make_from_root(binary(NodeKind::kSub, f.root, make_affine(u, 0.0).root), f.dim);
}

std::optional<std::pair<Vec, double>> as_affine(const FunctionSpec& f) {
  if (!is_affine_node(*f.root)) return std::nullopt;
  const GradResult g = try_gradient(f, zeros(f.dim));
  if (!g.in_domain || !g.differentiable) return std::nullopt;
  return std::make_pair(g.grad, g.value);
}

}  // namespace horizon
