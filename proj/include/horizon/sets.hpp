#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "horizon/expr.hpp"
#include "horizon/limit_set.hpp"

namespace horizon {

enum class SetKind {
  kWhole,
  kHalfspace,   // a.x <= b
  kBall,        // ||x - center|| <= radius
  kPolyhedron,  // A x <= b
  kConstraintSystem,  // g_i(x) <= 0, h_j(x) = 0
  kGraph,       // x_coord = phi(other coordinates), oriented by (grad phi, -1)
  kEpigraph,    // x_dim >= f(x_1..x_{dim-1})
  kProduct,     // s1 x s2
};

// Closed subset of R^dim.  kGraph carries the orientation convention of the
// underlying function graph: its normal cone at a smooth point is the ray
// spanned by (grad phi, -1), i.e. the outward normal of the region above the
// graph.  Estimators honor the same convention on the projection route.
struct SetSpec {
  int dim = 0;
  SetKind kind = SetKind::kWhole;

  Vec a;  // halfspace
  double b = 0.0;

  Vec center;  // ball
  double radius = 1.0;

  std::vector<Vec> A;  // polyhedron rows
  Vec bvec;

  std::vector<FunctionSpec> g, h;  // constraint system

  int graph_coord = -1;  // kGraph: which coordinate equals phi(rest)
  std::optional<FunctionSpec> graph_phi;

  std::optional<FunctionSpec> epi_f;  // kEpigraph: function on R^{dim-1}

  std::shared_ptr<const SetSpec> s1, s2;  // product
};

SetSpec parse_set(const std::string& text, int dim);
std::string to_string(const SetSpec& S);

SetSpec make_whole(int dim);
SetSpec make_halfspace(const Vec& a, double b);
SetSpec make_ball(const Vec& center, double radius);
SetSpec make_polyhedron(std::vector<Vec> A, Vec b);
SetSpec make_constraint_system(std::vector<FunctionSpec> g, std::vector<FunctionSpec> h);
SetSpec make_graph(int dim, int coord_one_based, const FunctionSpec& phi);
SetSpec make_epigraph(const FunctionSpec& f);
SetSpec make_product(const SetSpec& s1, const SetSpec& s2);
// Both sets expressed as one constraint system over the same space.
SetSpec intersect_sets(const SetSpec& s1, const SetSpec& s2);

// Violation measure; 0 on the set.  Membership tolerance is 1e-8.
double set_residual(const SetSpec& S, const Vec& x);
// Gradient-normalized violation (first-order distance surrogate).
double set_violation_scaled(const SetSpec& S, const Vec& x);
bool set_contains(const SetSpec& S, const Vec& x, double tol = 1e-8);
bool set_interior_contains(const SetSpec& S, const Vec& x, double margin = 1e-6);

// Euclidean projection; closed form where available, multistart penalty
// descent otherwise.  May return several near-minimizers (set-valued).
std::vector<Vec> project(const SetSpec& S, const Vec& x);
double set_distance(const SetSpec& S, const Vec& x);

// Pointwise limiting normal cone (throws NotInSet when x is off the set).
LimitSet normal_cone_at(const SetSpec& S, const Vec& x);

// N(inf_I) via the projection route (cone(x - proj(x)) over escaping samples).
LimitSet normal_cone_at_infinity(const SetSpec& S, const IndexSet& I, const SamplingPlan& plan);
// Same sweep, returning the accepted unit offset directions; callers may add
// their own sample points per level (the epigraph route does).
std::vector<Vec> accepted_normal_dirs_at_infinity(
    const SetSpec& S, const IndexSet& I, const SamplingPlan& plan,
    const std::function<std::vector<Vec>(int)>& extra_samples = {});
// Independent route: pointwise normal cones at escaping on-set samples.
LimitSet normal_cone_at_infinity_onset(const SetSpec& S, const IndexSet& I,
                                       const SamplingPlan& plan);

Certificate boundary_escape(const SetSpec& S, const IndexSet& I, const SamplingPlan& plan);

struct IntersectionRuleResult {
  Certificate qualification;
  Certificate inclusion;
  LimitSet cone1, cone2, cone_intersection;
};
IntersectionRuleResult check_intersection_rule(const SetSpec& S1, const SetSpec& S2,
                                               const IndexSet& I, const SamplingPlan& plan);

struct ProductConeResult {
  LimitSet product;  // N(inf_I1) x N(inf_I2)
  LimitSet direct;   // N of the product set
  Certificate inclusion;
};
ProductConeResult product_cone(const SetSpec& S1, const IndexSet& I1, const SetSpec& S2,
                               const IndexSet& I2, const SamplingPlan& plan);

// Heuristic probes used by validators and the distance-function analysis.
bool set_projected_unbounded(const SetSpec& S, const IndexSet* I = nullptr);
bool set_bounded_probe(const SetSpec& S);
// Deterministic feasible point search; nullopt when none found (exact-zero
// residual requirement distinguishes asymptotically-touching sets).
std::optional<Vec> find_feasible_point(const SetSpec& S, double box = 64.0);

nlohmann::json to_json(const SetSpec& S);

}  // namespace horizon
