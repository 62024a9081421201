#pragma once

#include "horizon/expr.hpp"
#include "horizon/limit_set.hpp"
#include "horizon/sets.hpp"

namespace horizon {

// Pointwise subdifferential data at one sample.  `values` are finite
// subgradients; `cone_rays` are unit directions whose whole nonnegative span
// belongs to the subdifferential (indicator normals); `singular_dirs` are unit
// directions of nonzero singular subgradients.
struct SubgradientSample {
  Vec location;
  int level = 0;
  std::vector<Vec> values;
  std::vector<Vec> cone_rays;
  std::vector<Vec> singular_dirs;
  double f_value = 0.0;
  bool convex_hull = false;  // values denote co(values)
};

// Limiting subdifferential oracle for the supported classes; throws
// UnsupportedClass when the structure is not enumerable (callers fall back to
// epigraph sampling).
SubgradientSample subdiff_at(const FunctionSpec& f, const Vec& x);

LimitSet singular_subdiff_at(const FunctionSpec& f, const Vec& x);

SubgradientSample pointwise_sum_rule(const FunctionSpec& f1, const FunctionSpec& f2, const Vec& x);

// The set the sample denotes, as a LimitSet over subgradient space.
LimitSet sample_to_limit_set(const SubgradientSample& s, int dim);

nlohmann::json to_json(const SubgradientSample& s);

// Sampled normal directions of epi f at (x, f(x)); the fallback oracle behind
// both pointwise subdifferentials and the epigraph consistency tests.
LimitSet epigraph_normal_cone_sampled(const FunctionSpec& f, const Vec& x);

}  // namespace horizon
