#pragma once

#include <map>
#include <string>

#include "naeq/solver.hpp"

namespace naeq {

// Finite sample of interior strategy profiles (grid plus seeded uniform
// draws) and bias values over which the structural assumptions are checked.
struct SamplingPlan {
  std::vector<Interval> box;       // sampling region, inside the strategy box
  int grid_per_dim = 4;
  int random_points = 64;
  Vec alpha_samples = {0.25, 0.5, 1.0, 2.0, 4.0};  // symmetric profiles for A3-A6
  int random_alpha_profiles = 4;
  std::pair<double, double> alpha_range = {0.25, 4.0};
  double deviation_scale = 0.2;    // relative size of the A6 unilateral deviation
  std::uint64_t seed = 11;
  SolverSettings inner;            // for the A5/A6 equilibrium solves

  static SamplingPlan around(const Vec& anchor, double spread = 0.5);
};

// Anchor the default plan on the unbiased equilibrium.
SamplingPlan default_plan(const GameSpec& game, const BiasFunction& f = {});

enum class CheckResult { pass, heuristic_pass, fail, vacuous };

const char* to_string(CheckResult r);

struct Witness {
  std::string assumption;
  Vec x;
  Vec alpha;
  int i = -1;
  int j = -1;
  double value_a = 0.0;
  double value_b = 0.0;
  std::string note;
};

struct AuditReport {
  // Signs of d^2 pi_i/dx_i dx_j, d pi_i/dx_j, d pi_i/d x_i; 0 when not
  // constant (or vacuous for n = 1).
  int sign_comp = 0;
  int sign_extr = 0;
  int sign_partial = 0;
  std::map<std::string, CheckResult> passed;  // "A1" .. "A6"
  std::vector<Witness> witnesses;
  std::map<std::string, double> margins;  // minimum |derivative| seen per check
  int samples = 0;
  int evaluation_failures = 0;

  bool all_passed() const {
    for (const auto& [id, r] : passed)
      if (r == CheckResult::fail) return false;
    return true;
  }
};

AuditReport audit_assumptions(const GameSpec& game, const BiasFunction& f,
                              const SamplingPlan& plan);

}  // namespace naeq
