#include "naeq/merger.hpp"

#include <cmath>

namespace naeq {

namespace {

double merger_root(double b, double c) { return std::sqrt(36.0 * b * b - 36.0 * b * c + c * c); }

}  // namespace

MergerScenario MergerScenario::make(double a, double b, double c) {
  require(a > 0.0, ErrorCode::config_error, "intercept must be positive");
  require(b > c && c > 0.0, ErrorCode::config_error, "merger analysis assumes b > c > 0");
  MergerScenario s;
  s.a = a;
  s.b = b;
  s.c = c;
  return s;
}

double estimate_marginal_cost(const MergerScenario& s) {
  const double r = merger_root(s.b, s.c);
  return 3.0 * s.a * (6.0 * s.b - 3.0 * s.c - r) /
         ((3.0 * s.b - s.c) * (r + 6.0 * s.b - 5.0 * s.c));
}

double estimate_marginal_cost_numeric(const MergerScenario& s) {
  // Symmetric Nash with common cost: xbar = (a + b~ mc) / (2 b~ - 2 c~).
  LinearPriceMarket pre = s.pre_market();
  const double x_pre = pre.symmetric_nae_price(pre.symmetric_nae_alpha_value());
  const double bt = s.b - s.c / 3.0;
  const double ct = s.c / 3.0;
  return (x_pre * (2.0 * bt - 2.0 * ct) - s.a) / bt;
}

std::pair<double, double> economist_prediction(const MergerScenario& s) {
  const double a = s.a, b = s.b, c = s.c;
  const double r = merger_root(b, c);
  const double den2 = 6.0 * b * b - 6.0 * b * c + c * c;
  require(std::fabs(den2) > 1e-14, ErrorCode::degenerate_denominator,
          "post-merger system degenerate");
  const double x1 = a * (c * c * (r - 5.0 * c) - 144.0 * b * b * c + 108.0 * b * b * b +
                         54.0 * b * c * c) /
                    ((3.0 * b - c) * den2 * (r + 6.0 * b - 5.0 * c));
  const double x23 = a * (c * (r + 7.0 * c) + 36.0 * b * b - 36.0 * b * c) /
                     (den2 * (r + 6.0 * b - 5.0 * c));
  return {x1, x23};
}

std::pair<double, double> economist_prediction_numeric(const MergerScenario& s) {
  // Firm 1 maximizes (x1 - mc) q1; the merged firm maximizes
  // (x2 - mc) q2 + (x3 - mc) q3 over two separate prices, which coincide by
  // symmetry. Damped iteration alternating firm 1's FOC with the exact 2x2
  // solve of the merged firm's joint FOCs; weights stay the pre-merger 1/3.
  const double a = s.a, c = s.c, mc = s.mc;
  const double w = 1.0 / 3.0;
  const double k = s.b - c * w;  // own effective slope b - c w
  double x1 = a / s.b, x2 = a / s.b, x3 = a / s.b;
  for (int it = 0; it < 200000; ++it) {
    // q1 + (x1 - mc)(-k) = 0 with q1 = a - k x1 + c w (x2 + x3).
    const double x1n = (a + c * w * (x2 + x3) + k * mc) / (2.0 * k);
    // d/dx2 [(x2-mc) q2 + (x3-mc) q3] = q2 - k (x2 - mc) + c w (x3 - mc) = 0
    // and the mirror image: [2k, -2cw; -2cw, 2k] (x2, x3) = (r, r).
    const double off = 2.0 * c * w;
    const double diag = 2.0 * k;
    const double r2 = a + c * w * x1 + (k - c * w) * mc;
    const double r3 = r2;
    const double det = diag * diag - off * off;
    require(std::fabs(det) > 1e-14, ErrorCode::degenerate_denominator,
            "merged-firm FOC system singular");
    const double x2n = (diag * r2 + off * r3) / det;
    const double x3n = (diag * r3 + off * r2) / det;
    const double delta = std::max({std::fabs(x1n - x1), std::fabs(x2n - x2), std::fabs(x3n - x3)});
    x1 = 0.5 * (x1 + x1n);
    x2 = 0.5 * (x2 + x2n);
    x3 = 0.5 * (x3 + x3n);
    if (delta < 1e-13) break;
  }
  return {x1, 0.5 * (x2 + x3)};
}

MergerScenario postmerger_outcomes(MergerScenario s) {
  LinearPriceMarket pre = s.pre_market();
  s.alpha_pre = pre.symmetric_nae_alpha_value();
  s.x_pre = pre.symmetric_nae_price(s.alpha_pre);
  s.x_ne_pre = pre.symmetric_nash_price();
  s.mc = estimate_marginal_cost(s);

  LinearPriceMarket merged = s.merged_market();
  s.alpha_post = merged.duopoly_nae_alpha();

  const Vec short_run = merged.alpha_equilibrium({s.alpha_pre, s.alpha_pre});
  const Vec long_run = merged.alpha_equilibrium({s.alpha_post, s.alpha_post});
  s.x1_short = short_run[0];
  s.x23_short = short_run[1];
  s.x1_long = long_run[0];
  s.x23_long = long_run[1];

  auto econ = economist_prediction(s);
  s.x1_mc = econ.first;
  s.x23_mc = econ.second;

  s.ordering_ok = s.x1_mc < s.x1_short && s.x1_short < s.x1_long && s.x23_mc < s.x23_short &&
                  s.x23_short < s.x23_long;
  return s;
}

}  // namespace naeq
