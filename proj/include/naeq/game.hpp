#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "naeq/errors.hpp"

namespace naeq {

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = 0.0;
  double hi = kInf;

  bool contains(double x) const { return x >= lo && x <= hi; }
  bool interior(double x) const { return x > lo && x < hi; }
  double clamp(double x) const { return std::min(std::max(x, lo), hi); }
  double span() const { return hi - lo; }
  bool bounded_above() const { return std::isfinite(hi); }
  bool bounded_below() const { return std::isfinite(lo); }

  // Reasonable interior starting point regardless of which ends are bounded.
  double start_point() const {
    if (bounded_below() && bounded_above()) return lo + 0.5 * span();
    if (bounded_below()) return lo + 1.0;
    if (bounded_above()) return hi - 1.0;
    return 0.0;
  }
};

enum class GameKind { linear_price, advertising, team_production, circle_example, custom };

std::string to_string(GameKind kind);

// Demand evaluator: x -> (q_1 .. q_n).
using DemandFn = std::function<Vec(const Vec&)>;
// Profit evaluator for player i at (x_i, q_i). Strategy and own demand are the
// only arguments, matching the payoff structure pi_i(x_i, q_i(x)).
using ProfitFn = std::function<double(int, double, double)>;

// Optional closed-form partials. When present they are used everywhere in
// place of central differences (and checked against them in tests).
struct AnalyticDerivatives {
  std::function<double(int, double, double)> dprofit_dx;  // d pi_i / d x_i at (x_i, q_i)
  std::function<double(int, double, double)> dprofit_dq;  // d pi_i / d q_i at (x_i, q_i)
  std::function<double(int, int, const Vec&)> ddemand;    // d q_i / d x_j at x
};

// An n-player demand/profit game over real strategy intervals.
class GameSpec {
 public:
  GameSpec(int n, std::vector<Interval> intervals, DemandFn demand, ProfitFn profit,
           GameKind kind = GameKind::custom,
           std::optional<AnalyticDerivatives> derivatives = std::nullopt)
      : n_(n),
        intervals_(std::move(intervals)),
        demand_(std::move(demand)),
        profit_(std::move(profit)),
        kind_(kind),
        derivatives_(std::move(derivatives)) {
    require(n_ >= 1, ErrorCode::invalid_argument, "game needs at least one player");
    require(static_cast<int>(intervals_.size()) == n_, ErrorCode::invalid_argument,
            "one strategy interval per player");
    for (const auto& iv : intervals_)
      require(iv.lo < iv.hi, ErrorCode::invalid_argument, "empty strategy interval");
  }

  int players() const { return n_; }
  GameKind kind() const { return kind_; }
  const Interval& interval(int i) const { return intervals_.at(i); }
  const std::vector<Interval>& intervals() const { return intervals_; }
  bool has_analytic() const { return derivatives_.has_value(); }
  const AnalyticDerivatives& analytic() const { return *derivatives_; }

  Vec demand(const Vec& x) const { return demand_(x); }

  double profit(int i, double x_i, double q_i) const { return profit_(i, x_i, q_i); }

  double profit(int i, const Vec& x) const {
    const Vec q = demand_(x);
    return profit_(i, x[i], q[i]);
  }

  Vec profits(const Vec& x) const {
    const Vec q = demand_(x);
    Vec out(n_);
    for (int i = 0; i < n_; ++i) out[i] = profit_(i, x[i], q[i]);
    return out;
  }

  bool in_box(const Vec& x) const {
    for (int i = 0; i < n_; ++i)
      if (!intervals_[i].contains(x[i])) return false;
    return true;
  }

 private:
  int n_;
  std::vector<Interval> intervals_;
  DemandFn demand_;
  ProfitFn profit_;
  GameKind kind_;
  std::optional<AnalyticDerivatives> derivatives_;
};

// Analyst bias function. Only the multiplicative family is implemented; the
// feasible set A is an open interval around 1 inside (0, inf), truncated to
// [domain_lo, domain_hi] for numerical work.
struct BiasFunction {
  double domain_lo = 0.05;
  double domain_hi = 20.0;

  double apply(double sensitivity, double alpha) const { return alpha * sensitivity; }

  bool in_domain(double alpha) const { return alpha >= domain_lo && alpha <= domain_hi; }

  double clamp(double alpha) const { return std::min(std::max(alpha, domain_lo), domain_hi); }

  // Bias that makes the perceived FOC hold at the given partials, i.e. solves
  // dpi/dx + dpi/dq * f(dq/dx, alpha) = 0. Absent when the required alpha is
  // non-positive or the term structure is degenerate.
  std::optional<double> invert(double own_partial, double demand_margin,
                               double own_sensitivity) const {
    const double denom = demand_margin * own_sensitivity;
    if (denom == 0.0 || !std::isfinite(denom)) return std::nullopt;
    const double alpha = -own_partial / denom;
    if (!std::isfinite(alpha) || alpha <= 0.0) return std::nullopt;
    return alpha;
  }
};

// Per-player analyst biases.
struct BiasProfile {
  Vec alpha;

  static BiasProfile unbiased(int n) { return BiasProfile{Vec(static_cast<size_t>(n), 1.0)}; }

  void validate(const BiasFunction& f) const {
    for (double a : alpha)
      require(a > 0.0 && f.in_domain(a), ErrorCode::out_of_domain,
              "bias outside feasible set A");
  }
};

// A strategy profile together with the demands and profits it induces.
struct ProfileEval {
  Vec x;
  Vec q;
  Vec pi;
};

inline ProfileEval evaluate(const GameSpec& game, const Vec& x) {
  ProfileEval out;
  out.x = x;
  out.q = game.demand(x);
  out.pi.resize(x.size());
  for (int i = 0; i < game.players(); ++i) out.pi[i] = game.profit(i, x[i], out.q[i]);
  return out;
}

// Relabels strategies as their negatives: X' = -X, q'(x) = q(-x),
// pi'_i(x_i, q_i) = pi_i(-x_i, q_i). Involution up to the kind tag, which
// becomes custom because sign-specific closed forms no longer apply.
GameSpec negate_relabel(const GameSpec& game);

}  // namespace naeq
