#pragma once

#include <cstdint>

#include "naeq/derivatives.hpp"
#include "naeq/game.hpp"

namespace naeq {

struct SolverSettings {
  double damping = 0.5;        // in (0, 1]
  double tolerance = 1e-10;    // on max_i |perceived marginal profit|
  int max_iterations = 10000;
  Vec initial;                 // empty: interval-derived default
  int multistarts = 8;         // seeded restarts when the damped sweep stalls
  std::uint64_t seed = 2024;
};

enum class SolveStatus { converged, non_convergence, soc_violation };

const char* to_string(SolveStatus status);

struct SolveReport {
  Vec x;
  double residual = kInf;
  int iterations = 0;
  SolveStatus status = SolveStatus::non_convergence;
  Vec perceived_soc;                 // perceived second derivative per player
  std::vector<Vec> extra_fixed_points;  // distinct multi-start fixed points beyond x

  bool converged() const { return status == SolveStatus::converged; }
};

// Best reply under the biased first-order condition: the interior root of the
// perceived marginal profit with negative perceived curvature, found by
// geometric bracket expansion from x[i] plus safeguarded Newton; falls back to
// the boundary maximizer of perceived profit when the FOC has no interior
// root. Throws NoSignChange when improvement is unbounded and SOCViolation
// when the root found is not a perceived local maximum.
double perceived_best_reply(const GameSpec& game, const BiasFunction& f, double alpha_i,
                            const Vec& x, int i);

// Damped simultaneous (Jacobi) perceived-best-reply iteration. Residual is
// max_i |perceived marginal profit|; on stall the solver retries from seeded
// starts and reports any distinct fixed points it finds.
SolveReport solve_alpha_equilibrium(const GameSpec& game, const BiasFunction& f,
                                    const BiasProfile& bias, const SolverSettings& settings = {});

// Throws NonConvergence / SOCViolation if the report is not a clean fixed point.
const SolveReport& require_converged(const SolveReport& report);

double max_foc_residual(const GameSpec& game, const BiasFunction& f, const BiasProfile& bias,
                        const Vec& x);

// Projected-stationarity residual for one player: |perceived marginal| at
// interior points; at an interval endpoint only an outward-pointing gradient
// counts (the bound absorbs the rest). Evaluated one step inside the endpoint
// where derivatives may be singular.
double kkt_residual(const GameSpec& game, const BiasFunction& f, double alpha_i, Vec x, int i);

}  // namespace naeq
