#pragma once

#include "naeq/markets.hpp"

namespace naeq {

// Pre-merger symmetric 3-firm price competition (a, b, c with b > c > 0) and
// the counterfactual quantities an outside economist would produce when
// reading the NAE data as an unbiased Nash equilibrium with marginal costs.
struct MergerScenario {
  double a = 20.0;
  double b = 1.0;
  double c = 0.5;
  double w1 = 1.0 / 3.0;
  double w23 = 2.0 / 3.0;

  // Filled by postmerger_outcomes:
  double alpha_pre = 0.0;
  double alpha_post = 0.0;
  double mc = 0.0;
  double x_pre = 0.0;       // observed pre-merger NAE price
  double x_ne_pre = 0.0;    // true (zero-cost) Nash price pre-merger
  double x1_mc = 0.0;       // economist's post-merger price, firm 1
  double x23_mc = 0.0;      // economist's post-merger price, merged firm
  double x1_short = 0.0;    // x^post(alpha_pre)
  double x23_short = 0.0;
  double x1_long = 0.0;     // x^post(alpha_post)
  double x23_long = 0.0;
  bool ordering_ok = false;  // x^post(mc) < x^post(alpha_pre) < x^post(alpha_post)

  static MergerScenario make(double a, double b, double c);

  LinearPriceMarket pre_market() const { return LinearPriceMarket::symmetric(a, b, c, 3); }
  // Post-merger duopoly: firm 1 keeps weight 1/3, the merged firm prices
  // goods 2 and 3 at one common price with weight 2/3.
  LinearPriceMarket merged_market() const {
    return LinearPriceMarket::weighted({a, a}, {b, b}, {c, c}, {w1, w23});
  }
};

// Marginal cost rationalizing the observed pre-merger mean price as an
// unbiased Nash equilibrium.
double estimate_marginal_cost(const MergerScenario& s);

// Numeric inversion of the symmetric Nash-with-cost mean price (oracle for the
// closed form above).
double estimate_marginal_cost_numeric(const MergerScenario& s);

// Economist's post-merger prediction (x_1, x_23) given the estimated cost.
std::pair<double, double> economist_prediction(const MergerScenario& s);

// Same prediction from the 2-equation Nash system, with the merged firm
// maximizing joint profit over two separate prices.
std::pair<double, double> economist_prediction_numeric(const MergerScenario& s);

// Full pipeline: biases, estimated cost, all five price columns and the
// ordering verdict.
MergerScenario postmerger_outcomes(MergerScenario s);

}  // namespace naeq
