#pragma once

#include "horizon/expr.hpp"
#include "horizon/limit_set.hpp"
#include "horizon/pointwise.hpp"

namespace horizon {

struct InfinityEstimate {
  LimitSet limiting;
  LimitSet singular;                // closed cone, always contains 0
  LimitSet pointwise_singular;      // Limsup of pointwise singular subdifferentials
  std::vector<std::string> trace;   // per-level summaries
};

// Workhorse: one sweep produces the limiting and singular estimates together.
InfinityEstimate estimate_infinity(const FunctionSpec& f, const SamplingPlan& plan);

LimitSet estimate_subdiff_at_infinity(const FunctionSpec& f, const SamplingPlan& plan);
LimitSet estimate_singular_at_infinity(const FunctionSpec& f, const SamplingPlan& plan);

// Independent route through N(epi f) at infinity; returns (limiting, singular).
std::pair<LimitSet, LimitSet> subdiff_at_infinity_via_epigraph(const FunctionSpec& f,
                                                               const SamplingPlan& plan);

Certificate check_nonemptiness(const FunctionSpec& f, const SamplingPlan& plan);
Certificate check_scaling_identities(const FunctionSpec& f, double lambda,
                                     const SamplingPlan& plan);

// Points probed by the estimators at one level (shared across both routes so
// tests can introspect coverage).
std::vector<Vec> subdiff_sample_points(const FunctionSpec& f, const SamplingPlan& plan,
                                       int level);

// Collapse long collinear runs of points into base + affine ray; keeps the
// finite representation faithful for unbounded non-cone limit sets.
void compress_chains(LimitSet& L, double span_threshold);

nlohmann::json to_json(const InfinityEstimate& e, const SamplingPlan& plan);

}  // namespace horizon
