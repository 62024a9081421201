#include "horizon/errors.hpp"

namespace horizon {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::syntax_error: return "SyntaxError";
    case Errc::semantic_error: return "SemanticError";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::not_differentiable: return "NotDifferentiable";
    case Errc::projection_failed: return "ProjectionFailed";
    case Errc::not_in_set: return "NotInSet";
    case Errc::unbounded_projection_required: return "UnboundedProjectionRequired";
    case Errc::empty_intersection: return "EmptyIntersection";
    case Errc::inconclusive_sampling: return "InconclusiveSampling";
    case Errc::domain_bounded: return "DomainBoundedError";
    case Errc::unsupported_class: return "UnsupportedClass";
    case Errc::both_non_lipschitz: return "BothNonLipschitz";
    case Errc::qualification_failed: return "QualificationFailed";
    case Errc::coercivity_failed: return "CoercivityFailed";
    case Errc::not_lipschitz_at_infinity: return "NotLipschitzAtInfinity";
    case Errc::not_piecewise_linear: return "NotPiecewiseLinear";
    case Errc::empty_or_bounded_constraint_set: return "EmptyOrBoundedConstraintSet";
    case Errc::assumption_violated: return "AssumptionViolated";
    case Errc::condition_not_refuted: return "ConditionNotRefuted";
    case Errc::empty_feasible_region: return "EmptyFeasibleRegion";
    case Errc::not_bounded_below: return "NotBoundedBelow";
    case Errc::descent_stalled: return "DescentStalled";
    case Errc::dimension_too_high: return "DimensionTooHigh";
    case Errc::io_error: return "IOError";
    case Errc::usage_error: return "UsageError";
  }
  return "Error";
}

}  // namespace horizon
