#pragma once

#include "naeq/game.hpp"

namespace naeq {

enum class DerivMethod { analytic, central_difference };

// First-order pieces of the FOC for one player, plus the cross second
// derivatives d^2 pi_i / dx_i dx_j. Entries indexed by j; slot j == i of
// cross_sensitivity holds the own sensitivity for convenience.
struct DerivativeReport {
  int player = 0;
  double own_partial = 0.0;      // d pi_i / d x_i at fixed q
  double demand_margin = 0.0;    // d pi_i / d q_i
  double own_sensitivity = 0.0;  // d q_i / d x_i
  Vec cross_sensitivity;         // d q_i / d x_j
  Vec cross_second;              // d^2 pi_i / dx_i dx_j (slot i: own second derivative)
  DerivMethod method = DerivMethod::central_difference;
  double step = 0.0;
};

// Step sizes balancing truncation against round-off: h ~ eps^(1/3) for first
// derivatives, eps^(1/4) for the three-point second-derivative stencil.
double fd_step_first(double x);
double fd_step_second(double x);

// d q_i / d x_j.
double demand_sensitivity(const GameSpec& game, const Vec& x, int i, int j);

// Partials of pi_i(x_i, q_i) holding the other argument fixed.
double profit_partial_x(const GameSpec& game, int i, double x_i, double q_i);
double profit_partial_q(const GameSpec& game, int i, double x_i, double q_i);

DerivativeReport derivatives(const GameSpec& game, const Vec& x, int i);

// Total derivative d pi_i / d x_j of the true payoff (j != i gives the payoff
// externality; j == i the own total derivative).
double total_profit_derivative(const GameSpec& game, const Vec& x, int i, int j);

// Biased FOC value d pi_i^alpha / d x_i = dpi/dx + dpi/dq * f(dq/dx, alpha_i).
double perceived_marginal_profit(const GameSpec& game, const BiasFunction& f,
                                 const BiasProfile& bias, const Vec& x, int i);
double perceived_marginal_profit(const GameSpec& game, const BiasFunction& f, double alpha_i,
                                 const Vec& x, int i);

// d^2 pi_i^alpha / d x_i^2 by differencing the perceived marginal profit.
double perceived_second_derivative(const GameSpec& game, const BiasFunction& f, double alpha_i,
                                   const Vec& x, int i);

// d^2 pi_i^alpha / d x_j d x_i, j != i.
double perceived_cross_second(const GameSpec& game, const BiasFunction& f, double alpha_i,
                              const Vec& x, int i, int j);

}  // namespace naeq
