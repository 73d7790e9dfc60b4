#include "naeq/derivatives.hpp"

#include <cmath>

namespace naeq {

namespace {

constexpr double kEps = 2.220446049250313e-16;

double check_finite(double v, const char* what) {
  if (!std::isfinite(v)) raise(ErrorCode::non_finite_evaluation, what);
  return v;
}

// Two-point stencil clipped one step inside the interval. Spacing shrinks to
// roughly h near an endpoint instead of letting an evaluation land on it.
struct Stencil {
  double hi = 0.0;
  double lo = 0.0;
};

Stencil stencil(const Interval& iv, double x, double h) {
  const double pad = 0.49 * h;
  const double floor = iv.lo + pad;
  const double ceil = iv.bounded_above() ? iv.hi - pad : kInf;
  Stencil s;
  s.hi = std::min(x + h, ceil);
  s.lo = std::max(x - h, floor);
  if (!(s.lo < s.hi)) {
    s.lo = floor;
    s.hi = std::min(floor + 2.0 * h, ceil);
  }
  return s;
}

}  // namespace

std::string to_string(GameKind kind) {
  switch (kind) {
    case GameKind::linear_price: return "linear-price";
    case GameKind::advertising: return "advertising";
    case GameKind::team_production: return "team-production";
    case GameKind::circle_example: return "circle-example";
    case GameKind::custom: return "custom";
  }
  return "custom";
}

double fd_step_first(double x) { return std::cbrt(kEps) * std::max(1.0, std::fabs(x)); }

double fd_step_second(double x) { return std::pow(kEps, 0.25) * std::max(1.0, std::fabs(x)); }

double demand_sensitivity(const GameSpec& game, const Vec& x, int i, int j) {
  if (game.has_analytic()) return check_finite(game.analytic().ddemand(i, j, x), "d q_i / d x_j");
  const Stencil s = stencil(game.interval(j), x[j], fd_step_first(x[j]));
  Vec xp = x, xm = x;
  xp[j] = s.hi;
  xm[j] = s.lo;
  const double qp = game.demand(xp)[i];
  const double qm = game.demand(xm)[i];
  return check_finite((qp - qm) / (s.hi - s.lo), "d q_i / d x_j");
}

double profit_partial_x(const GameSpec& game, int i, double x_i, double q_i) {
  if (game.has_analytic())
    return check_finite(game.analytic().dprofit_dx(i, x_i, q_i), "d pi_i / d x_i");
  const Stencil s = stencil(game.interval(i), x_i, fd_step_first(x_i));
  return check_finite((game.profit(i, s.hi, q_i) - game.profit(i, s.lo, q_i)) / (s.hi - s.lo),
                      "d pi_i / d x_i");
}

double profit_partial_q(const GameSpec& game, int i, double x_i, double q_i) {
  if (game.has_analytic())
    return check_finite(game.analytic().dprofit_dq(i, x_i, q_i), "d pi_i / d q_i");
  const double h = fd_step_first(q_i);
  return check_finite((game.profit(i, x_i, q_i + h) - game.profit(i, x_i, q_i - h)) / (2.0 * h),
                      "d pi_i / d q_i");
}

DerivativeReport derivatives(const GameSpec& game, const Vec& x, int i) {
  DerivativeReport rep;
  rep.player = i;
  rep.method = game.has_analytic() ? DerivMethod::analytic : DerivMethod::central_difference;
  rep.step = fd_step_first(x[i]);

  const Vec q = game.demand(x);
  rep.own_partial = profit_partial_x(game, i, x[i], q[i]);
  rep.demand_margin = profit_partial_q(game, i, x[i], q[i]);
  rep.cross_sensitivity.resize(x.size());
  for (int j = 0; j < game.players(); ++j)
    rep.cross_sensitivity[j] = demand_sensitivity(game, x, i, j);
  rep.own_sensitivity = rep.cross_sensitivity[i];

  // Cross seconds by differencing the total own derivative in x_j.
  rep.cross_second.resize(x.size());
  for (int j = 0; j < game.players(); ++j) {
    const Stencil s = stencil(game.interval(j), x[j], fd_step_second(x[j]));
    Vec xp = x, xm = x;
    xp[j] = s.hi;
    xm[j] = s.lo;
    const double gp = total_profit_derivative(game, xp, i, i);
    const double gm = total_profit_derivative(game, xm, i, i);
    rep.cross_second[j] = check_finite((gp - gm) / (s.hi - s.lo), "d^2 pi_i / dx_i dx_j");
  }
  return rep;
}

double total_profit_derivative(const GameSpec& game, const Vec& x, int i, int j) {
  const Vec q = game.demand(x);
  double out = profit_partial_q(game, i, x[i], q[i]) * demand_sensitivity(game, x, i, j);
  if (j == i) out += profit_partial_x(game, i, x[i], q[i]);
  return out;
}

double perceived_marginal_profit(const GameSpec& game, const BiasFunction& f, double alpha_i,
                                 const Vec& x, int i) {
  require(f.in_domain(alpha_i) || alpha_i > 0.0, ErrorCode::out_of_domain, "alpha outside A");
  for (int j = 0; j < game.players(); ++j)
    require(game.interval(j).contains(x[j]), ErrorCode::out_of_domain,
            "profile outside the strategy box");
  const Vec q = game.demand(x);
  const double dpx = profit_partial_x(game, i, x[i], q[i]);
  const double dpq = profit_partial_q(game, i, x[i], q[i]);
  const double dqx = demand_sensitivity(game, x, i, i);
  return check_finite(dpx + dpq * f.apply(dqx, alpha_i), "perceived marginal profit");
}

double perceived_marginal_profit(const GameSpec& game, const BiasFunction& f,
                                 const BiasProfile& bias, const Vec& x, int i) {
  return perceived_marginal_profit(game, f, bias.alpha[i], x, i);
}

double perceived_second_derivative(const GameSpec& game, const BiasFunction& f, double alpha_i,
                                   const Vec& x, int i) {
  const Stencil s = stencil(game.interval(i), x[i], fd_step_second(x[i]));
  Vec xp = x, xm = x;
  xp[i] = s.hi;
  xm[i] = s.lo;
  const double gp = perceived_marginal_profit(game, f, alpha_i, xp, i);
  const double gm = perceived_marginal_profit(game, f, alpha_i, xm, i);
  return check_finite((gp - gm) / (s.hi - s.lo), "perceived second derivative");
}

double perceived_cross_second(const GameSpec& game, const BiasFunction& f, double alpha_i,
                              const Vec& x, int i, int j) {
  const Stencil s = stencil(game.interval(j), x[j], fd_step_second(x[j]));
  Vec xp = x, xm = x;
  xp[j] = s.hi;
  xm[j] = s.lo;
  const double gp = perceived_marginal_profit(game, f, alpha_i, xp, i);
  const double gm = perceived_marginal_profit(game, f, alpha_i, xm, i);
  return check_finite((gp - gm) / (s.hi - s.lo), "perceived cross second derivative");
}

GameSpec negate_relabel(const GameSpec& game) {
  const int n = game.players();
  std::vector<Interval> flipped(n);
  for (int i = 0; i < n; ++i) {
    const Interval& iv = game.interval(i);
    flipped[i] = Interval{iv.bounded_above() ? -iv.hi : -kInf, -iv.lo};
  }
  // Copy the spec by value into the closures; GameSpec is an immutable handle.
  GameSpec base = game;
  DemandFn demand = [base](const Vec& x) {
    Vec neg(x.size());
    for (size_t k = 0; k < x.size(); ++k) neg[k] = -x[k];
    return base.demand(neg);
  };
  ProfitFn profit = [base](int i, double x_i, double q_i) { return base.profit(i, -x_i, q_i); };
  std::optional<AnalyticDerivatives> deriv;
  if (game.has_analytic()) {
    deriv = AnalyticDerivatives{
        [base](int i, double x_i, double q_i) { return -base.analytic().dprofit_dx(i, -x_i, q_i); },
        [base](int i, double x_i, double q_i) { return base.analytic().dprofit_dq(i, -x_i, q_i); },
        [base](int i, int j, const Vec& x) {
          Vec neg(x.size());
          for (size_t k = 0; k < x.size(); ++k) neg[k] = -x[k];
          return -base.analytic().ddemand(i, j, neg);
        }};
  }
  return GameSpec(n, std::move(flipped), std::move(demand), std::move(profit), GameKind::custom,
                  std::move(deriv));
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::non_finite_evaluation: return "NonFiniteEvaluation";
    case ErrorCode::out_of_domain: return "OutOfDomain";
    case ErrorCode::no_sign_change: return "NoSignChange";
    case ErrorCode::soc_violation: return "SOCViolation";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::ambiguous_equilibrium: return "AmbiguousEquilibrium";
    case ErrorCode::unbounded_objective: return "UnboundedObjective";
    case ErrorCode::no_interior_nae: return "NoInteriorNAE";
    case ErrorCode::indefinite_signs: return "IndefiniteSigns";
    case ErrorCode::sample_failure: return "SampleFailure";
    case ErrorCode::degenerate_denominator: return "DegenerateDenominator";
    case ErrorCode::complex_root: return "ComplexRoot";
    case ErrorCode::insufficient_variation: return "InsufficientVariation";
    case ErrorCode::no_switches: return "NoSwitches";
    case ErrorCode::non_positive_alpha: return "NonPositiveAlpha";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::config_error: return "ConfigError";
  }
  return "Error";
}

}  // namespace naeq
