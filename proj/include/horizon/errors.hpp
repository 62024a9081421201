#pragma once

#include <stdexcept>
#include <string>

namespace horizon {

// Error taxonomy for the whole library. Codes are stable identifiers used by
// the CLI to map failures onto exit codes and report fields.
enum class Errc {
  syntax_error,
  semantic_error,
  dimension_mismatch,
  not_differentiable,
  projection_failed,
  not_in_set,
  unbounded_projection_required,
  empty_intersection,
  inconclusive_sampling,
  domain_bounded,
  unsupported_class,
  both_non_lipschitz,
  qualification_failed,
  coercivity_failed,
  not_lipschitz_at_infinity,
  not_piecewise_linear,
  empty_or_bounded_constraint_set,
  assumption_violated,
  condition_not_refuted,
  empty_feasible_region,
  not_bounded_below,
  descent_stalled,
  dimension_too_high,
  io_error,
  usage_error,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace horizon
