#pragma once

#include <optional>

#include "horizon/infinity.hpp"
#include "horizon/lipschitz.hpp"

namespace horizon {

enum class QualKind {
  kSingularSum,          // singular cones meet only at 0
  kNormalIntersection,   // set-geometry qualification
  kChainCoercive,        // chain rule implication
  kConstraintAtInfinity  // 0 outside the subgradient hull
};

const char* qual_kind_name(QualKind k);

struct QualificationReport {
  QualKind kind = QualKind::kSingularSum;
  Certificate verdict;
  std::optional<Vec> witness;  // present iff verdict Fails
};

QualificationReport check_sum_qualification(const FunctionSpec& f1, const FunctionSpec& f2,
                                            const SamplingPlan& plan);

struct RuleResult {
  LimitSet bound;
  Certificate inclusion;  // direct estimate contained in the bound
  LimitSet direct;
};

RuleResult sum_rule_at_infinity(const FunctionSpec& f1, const FunctionSpec& f2,
                                const SamplingPlan& plan);
RuleResult max_rule_at_infinity(const FunctionSpec& f1, const FunctionSpec& f2,
                                const SamplingPlan& plan);
RuleResult min_rule_at_infinity(const FunctionSpec& f1, const FunctionSpec& f2,
                                const SamplingPlan& plan);

// lambda ∘ ∂f(∞): lambda*limiting for lambda > 0, the singular cone at 0.
LimitSet lambda_compose(double lambda, const LimitSet& limiting, const LimitSet& singular);

// phi lives on R^{n+m}; checks the partial-subdifferential inclusions at ybar.
Certificate partial_subdiff_check(const FunctionSpec& phi, int n, const Vec& ybar,
                                  const SamplingPlan& plan);

struct ChainResult {
  Certificate coercivity;     // sampled g(x) -> inf check
  Certificate qualification;  // chain qualification on estimates
  LimitSet bound;             // union over u in est(f) of sum_i |u_i| est((sign u_i) g_i)
  LimitSet singular_bound;
  LimitSet direct;            // estimate of the composition (always computed)
  Certificate inclusion;
};
ChainResult chain_rule_at_infinity(const FunctionSpec& f, const std::vector<FunctionSpec>& g,
                                   const SamplingPlan& plan);

struct ConstraintConeResult {
  QualificationReport report;  // 0 notin co{generators}, margin = hull distance
  LimitSet bound;              // pos{generators}
  LimitSet direct;             // sampled N(inf) of the constraint set
  Certificate inclusion;
  std::vector<Vec> generators;
};
ConstraintConeResult constraint_cone_bound(const std::vector<FunctionSpec>& g,
                                           const std::vector<FunctionSpec>& h,
                                           const SamplingPlan& plan);

nlohmann::json to_json(const QualificationReport& q);

}  // namespace horizon
