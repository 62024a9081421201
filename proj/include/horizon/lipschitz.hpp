#pragma once

#include <optional>

#include "horizon/infinity.hpp"
#include "horizon/sets.hpp"

namespace horizon {

struct LipschitzReport {
  Certificate verdict;
  std::optional<double> L_estimate;  // present iff verdict Holds
  double R_estimate = 0.0;           // radius beyond which the bound was observed
  std::optional<LimitSet> clarke_hull;  // present only when Holds
};

LipschitzReport lipschitz_at_infinity(const FunctionSpec& f, const SamplingPlan& plan);

// co of the limiting estimate; requires Lipschitz-at-infinity to hold.
LimitSet clarke_at_infinity(const FunctionSpec& f, const SamplingPlan& plan);

struct PLExactResult {
  LimitSet bound;   // co{a_i : piece domain unbounded}
  LipschitzReport report;
  LimitSet direct;  // sampled estimate, certified inside the bound
  Certificate inclusion;
};
PLExactResult piecewise_linear_exact(const FunctionSpec& f, const SamplingPlan& plan);

// (limiting, singular) subdifferentials at infinity of dist(., S).
std::pair<LimitSet, LimitSet> distance_subdiff_at_infinity(const SetSpec& S,
                                                           const SamplingPlan& plan);

nlohmann::json to_json(const LipschitzReport& r);

}  // namespace horizon
