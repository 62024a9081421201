#pragma once

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "horizon/errors.hpp"
#include "horizon/vec.hpp"

namespace horizon {

struct SetSpec;  // sets.hpp

// a.x <= b
struct AffineIneq {
  Vec a;
  double b = 0.0;
};
using Guard = std::vector<AffineIneq>;  // conjunction of affine inequalities

enum class NodeKind {
  kConstant,
  kVar,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,   // integer exponent >= 0
  kExp,
  kLog,
  kAbs,
  kSqrt,
  kNorm,  // euclidean norm of its children
  kMax,
  kMin,
  kPiecewise,  // guards[i] active -> kids[i]; value is min over active pieces
  kIndicator,  // 0 on the set, +inf off it
  kCompose,    // outer function applied to kids
};

struct FunctionSpec;

struct ExprNode {
  NodeKind kind = NodeKind::kConstant;
  double value = 0.0;  // kConstant
  int var = -1;        // kVar
  int power = 0;       // kPow
  std::vector<std::shared_ptr<const ExprNode>> kids;
  std::vector<Guard> guards;                // kPiecewise
  std::shared_ptr<const SetSpec> set;       // kIndicator
  std::shared_ptr<const FunctionSpec> outer;  // kCompose
};

using NodePtr = std::shared_ptr<const ExprNode>;

enum ClassTag : unsigned {
  kTagSmooth = 1u << 0,
  kTagConvex = 1u << 1,
  kTagPiecewiseLinear = 1u << 2,
  kTagPiecewiseSmooth = 1u << 3,
  kTagExtendedValued = 1u << 4,
};

// One affine piece of a piecewise-linear function: <a,x> + b on the
// polyhedron D = {x : rows hold}.
struct AffinePiece {
  Vec a;
  double b = 0.0;
  Guard domain;
};

// Immutable, validated function on R^dim with values in R u {+inf}.
// Evaluation never yields -inf or NaN; out-of-domain points report +inf.
struct FunctionSpec {
  int dim = 0;
  NodePtr root;
  unsigned tags = 0;
  std::optional<std::vector<AffinePiece>> pl_pieces;  // present iff PiecewiseLinear

  bool has(ClassTag t) const { return (tags & t) != 0; }
};

// --- parsing / printing ---------------------------------------------------

FunctionSpec parse_function(const std::string& text, int dim);
std::string to_string(const FunctionSpec& f);
// Building blocks shared with the set DSL.
Guard parse_guard(const std::string& text, int dim);
NodePtr parse_expression_raw(const std::string& text, int dim);

// --- evaluation -----------------------------------------------------------

inline constexpr double kPlusInf = std::numeric_limits<double>::infinity();

// Total on valid inputs: finite value or +inf (off effective domain).
double evaluate(const FunctionSpec& f, const Vec& x);
bool in_domain(const FunctionSpec& f, const Vec& x);

struct GradResult {
  double value = 0.0;
  Vec grad;
  bool in_domain = false;
  bool differentiable = false;  // false on kinks / piece boundaries
};

// Forward-mode derivative; does not throw.  With strict_underflow, values
// that underflow to zero (e.g. exp of a large negative argument) mark the
// point as unreliable so samplers back off; the lenient variant treats them
// as an honest zero, which is what projection objectives want.
GradResult try_gradient(const FunctionSpec& f, const Vec& x, bool strict_underflow = true);

// Exact gradient for smooth points; throws NotDifferentiable / SemanticError.
Vec gradient_exact(const FunctionSpec& f, const Vec& x);

// Gradients of every smooth selection active at x (piece gradients at kinks;
// a single gradient at smooth points).  Throws UnsupportedClass when the
// active set is not enumerable (e.g. a multivariate norm kink).
std::vector<Vec> selection_gradients(const FunctionSpec& f, const Vec& x);

// --- builders (retag and validate like the parser does) --------------------

FunctionSpec make_from_root(NodePtr root, int dim, bool check_domain_unbounded = false);
FunctionSpec make_constant(double c, int dim);
FunctionSpec make_affine(const Vec& a, double b);
FunctionSpec make_sum(const FunctionSpec& f1, const FunctionSpec& f2);
FunctionSpec make_scaled(const FunctionSpec& f, double lambda);
FunctionSpec make_max(const FunctionSpec& f1, const FunctionSpec& f2);
FunctionSpec make_min(const FunctionSpec& f1, const FunctionSpec& f2);
FunctionSpec make_indicator(std::shared_ptr<const SetSpec> S);
FunctionSpec make_compose(const FunctionSpec& outer, const std::vector<FunctionSpec>& inner);
// Substitute x_{keep_dim..dim-1} := tail, producing a function on R^keep_dim.
FunctionSpec make_restriction(const FunctionSpec& f, int keep_dim, const Vec& tail);
// f_u(x) = f(x) - <u, x>
FunctionSpec make_tilted(const FunctionSpec& f, const Vec& u);

// Affine coefficient extraction; nullopt when f is not affine.
std::optional<std::pair<Vec, double>> as_affine(const FunctionSpec& f);

// Conservative "dom f is unbounded" check used by the validator.
bool domain_unbounded(const FunctionSpec& f);

}  // namespace horizon
