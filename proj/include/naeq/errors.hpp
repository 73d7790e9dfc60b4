#pragma once

#include <stdexcept>
#include <string>

namespace naeq {

enum class ErrorCode {
  non_finite_evaluation,
  out_of_domain,
  no_sign_change,
  soc_violation,
  non_convergence,
  ambiguous_equilibrium,
  unbounded_objective,
  no_interior_nae,
  indefinite_signs,
  sample_failure,
  degenerate_denominator,
  complex_root,
  insufficient_variation,
  no_switches,
  non_positive_alpha,
  invalid_argument,
  config_error,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) raise(code, what);
}

}  // namespace naeq
