#pragma once

#include <optional>

#include "horizon/calculus.hpp"
#include "horizon/infinity.hpp"
#include "horizon/sets.hpp"

namespace horizon {

struct ProblemSpec {
  FunctionSpec f;
  SetSpec omega;
  SamplingPlan plan;
  double box_bound = 20.0;  // M
  double grid_step = 0.05;

  void validate() const;
};

struct SolutionSetApprox {
  double f_star = kPlusInf;
  std::vector<Vec> points;
  bool certified_compact = false;
  double radius_bound = 0.0;
  bool decreasing_in_M = false;  // minimum keeps dropping as the box doubles
};

// Grid search over the box with a coordinate-descent refinement pass; the
// independent oracle every certificate is checked against.
SolutionSetApprox brute_force_minimize(const ProblemSpec& P);

// Theorem-side certificate for 0 in est(subdiff f at infinity) + est(N about
// the set); verifies assumptions (A1)-(A3) first (throws AssumptionViolated).
Certificate check_condition_at_infinity(const ProblemSpec& P);

enum class AttainmentDiagnosis {
  kConsistentUnattained,
  kConsistentAttained,
  kTheoremViolationSuspected,  // estimator under-sampling flag, never a disproof
};
const char* attainment_name(AttainmentDiagnosis d);

struct AttainmentReport {
  AttainmentDiagnosis diagnosis;
  SolutionSetApprox oracle;
  Certificate condition;
};
AttainmentReport diagnose_attainment(const ProblemSpec& P);

struct LagrangeResult {
  Vec lambda;  // one per inequality constraint
  Vec mu;      // one per equality constraint
  Certificate cert;
  double residual = kPlusInf;
};
LagrangeResult lagrange_at_infinity(const FunctionSpec& f, const std::vector<FunctionSpec>& g,
                                    const std::vector<FunctionSpec>& h, const SamplingPlan& plan);

struct CoercivityResult {
  Certificate cert;
  SolutionSetApprox sol;
  std::optional<std::pair<double, double>> weak_sharp;  // (c, R)
};
CoercivityResult certify_coercivity(const ProblemSpec& P);

struct StabilityReport {
  std::vector<double> eps;
  std::vector<double> max_dist;  // max over u at that radius of dist(Sol(u), Sol(0))
  bool bounded_below_all = true;
  bool nonempty_all = true;
  Certificate cert;
};
StabilityReport stability_scan(const ProblemSpec& P, const std::vector<double>& eps_grid,
                               int u_samples_per_radius);

// One Ekeland refinement step: f(x1) <= f(x0), |x1-x0| <= lambda, and the
// perturbed minimality inequality verified on probe points.
Vec ekeland_refine(const FunctionSpec& f, const SetSpec& omega, const Vec& x0, double eps,
                   double lambda);

nlohmann::json to_json(const SolutionSetApprox& s);

}  // namespace horizon
