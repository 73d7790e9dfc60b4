#pragma once

#include <optional>

#include "naeq/audit.hpp"
#include "naeq/solver.hpp"

namespace naeq {

// Equilibrium of the (n-1)-player biased FOC system with player i pinned at
// pinned_strategy, plus the bias (if any) that rationalizes the pinned choice.
struct ConstrainedEquilibrium {
  int pinned_player = 0;
  double pinned_strategy = 0.0;
  Vec x;
  std::optional<double> implied_alpha;
  SolveStatus status = SolveStatus::non_convergence;
  double residual = kInf;
  bool ambiguous = false;  // multi-start found a second fixed point
};

ConstrainedEquilibrium constrained_equilibrium(const GameSpec& game, const BiasFunction& f, int i,
                                               double x_i, const BiasProfile& alpha,
                                               const SolverSettings& settings = {});

struct LeaderResult {
  double x_i = 0.0;
  double value = -kInf;
  Vec profile;  // induced constrained equilibrium at the optimum
};

struct LeaderSettings {
  int scan_points = 21;
  double golden_tol = 3e-7;  // relative bracket width; the implied-bias
                             // extraction is first-order in the position
  int max_expansions = 12;
  SolverSettings inner;
};

// Maximizes the true payoff pi_i(x_i, x_{-i}(x_i, alpha_{-i})) over player i's
// strategy: coarse scan, then golden-section refinement; ties break toward the
// smaller strategy.
LeaderResult stackelberg_best(const GameSpec& game, const BiasFunction& f, int i,
                              const BiasProfile& alpha, const LeaderSettings& settings = {},
                              const Vec& anchor = {});

struct VerifySettings {
  int grid_points = 101;
  double grid_lo = 0.05;
  double grid_hi = 5.0;
  double tolerance = 1e-7;  // payoff-improvement slack, scaled per player
  SolverSettings inner;
};

struct VerifyResult {
  bool ok = false;
  double worst_violation = 0.0;  // largest payoff improvement found
  int worst_player = -1;
  double worst_alpha = 1.0;
  int inconclusive = 0;  // deviation points whose re-equilibration failed
  Vec best_deviation_payoff;  // per player, max over the grid (incl. no deviation)
};

// Checks the bias-deviation half of the NAE definition on a log-spaced grid.
VerifyResult verify_nae(const GameSpec& game, const BiasFunction& f, const BiasProfile& alpha,
                        const Vec& x, const VerifySettings& settings = {});

// Predicted vs observed direction results for the three propositions driven by
// the (comp, extr, partial) sign triple.
struct DirectionClassification {
  int sign_comp = 0;
  int sign_extr = 0;
  int sign_partial = 0;
  int predicted_br = 0;      // sign of x_i* - BR_i(x_-i*)
  int predicted_alpha = 0;   // sign of alpha_i* - 1
  int predicted_pareto = 0;  // +1: NAE dominates NE, -1: NE dominates symmetric NAE
  int observed_br = 0;
  int observed_alpha = 0;
  int observed_pareto = 0;
  bool br_matches = false;
  bool alpha_matches = false;
  bool pareto_matches = false;
  bool symmetric_pair = false;  // NAE and NE both symmetric (substitutes Pareto case)

  bool all_match() const { return br_matches && alpha_matches && pareto_matches; }
};

struct NaeSettings {
  double alpha_damping = 0.5;
  double alpha_tolerance = 1e-8;
  int max_outer = 500;
  Vec initial_alpha;        // empty: all ones
  Vec nash_initial;         // optional start for the unbiased reference solve
  bool run_verify = true;
  bool run_audit = false;   // audit precondition; failures become warnings when allowed
  bool allow_failed_audit = false;
  SamplingPlan audit_plan;  // used when run_audit and box non-empty
  VerifySettings verify;
  LeaderSettings leader;
  SolverSettings inner;
};

struct NaeReport {
  Vec alpha_star;
  Vec x_star;
  Vec q_star;
  Vec profits;
  Vec x_nash;
  Vec nash_profits;
  Vec br_unbiased_at_star;  // BR_i(x_-i*) with alpha_i = 1
  Vec characterization_residual;      // absolute, per player
  Vec characterization_rel;  // relative to max(|bias gap|, |slope sum|)
  Vec stackelberg_gaps;     // pi_i(x*) minus best deviation payoff
  bool converged = false;
  int outer_iterations = 0;
  bool verified = false;
  VerifyResult verify;
  std::optional<DirectionClassification> classification;
  std::optional<AuditReport> audit;
  std::vector<Vec> extra_fixed_points;
  std::vector<Vec> alpha_trajectory;  // bias profile per outer round
  std::vector<std::string> warnings;
};

// Fixed-point outer iteration on the bias profile: each player's bias is
// mapped to the one implied by her Stackelberg-leader strategy against the
// opponents' current biases, then damped.
NaeReport solve_nae(const GameSpec& game, const BiasFunction& f, const NaeSettings& settings = {});

// Characterization residual at (alpha, x): bias gap
// f(dq_i/dx_i, alpha_i) - dq_i/dx_i minus the response-slope-weighted sum of
// cross sensitivities, slopes by central differences of the constrained
// equilibrium map.
void characterization_residuals(const GameSpec& game, const BiasFunction& f, const BiasProfile& alpha,
                      const Vec& x, const SolverSettings& inner, Vec& absolute, Vec& relative);

DirectionClassification classify_directions(const AuditReport& audit, const NaeReport& nae,
                                            const Vec& nash);

}  // namespace naeq
