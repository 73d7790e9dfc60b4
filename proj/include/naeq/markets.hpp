#pragma once

#include <array>

#include "naeq/nae.hpp"

namespace naeq {

// Differentiated linear price competition: q_i = a_i - b_i x_i + c_i xbar with
// xbar the weighted mean price. The duopoly relabeling (b~, c~) is derived on
// construction so the direct two-firm form q_i = a_i - b~_i x_i + c~_i x_{-i}
// and the weighted-mean form share one code path.
struct LinearPriceMarket {
  Vec a, b, c, w;
  Vec b_tilde, c_tilde;  // populated for n == 2

  static LinearPriceMarket weighted(Vec a, Vec b, Vec c, Vec w);
  static LinearPriceMarket duopoly_direct(Vec a, Vec b_tilde, Vec c_tilde);
  static LinearPriceMarket symmetric(double a, double b, double c, int n);

  int players() const { return static_cast<int>(a.size()); }
  GameSpec game() const;

  // Exact alpha-equilibrium through the one-variable mean-price equation; no
  // iteration involved.
  Vec alpha_equilibrium(const Vec& alpha) const;
  Vec nash() const { return alpha_equilibrium(Vec(a.size(), 1.0)); }

  // Unique duopoly NAE bias sqrt(1 - c~_1 c~_2 / (b~_1 b~_2)); both firms
  // share it even when asymmetric.
  double duopoly_nae_alpha() const;
  NaeReport duopoly_nae(const BiasFunction& f = {}) const;

  // Symmetric-oligopoly NAE bias (root of the quadratic in b~/c~).
  double symmetric_nae_alpha_value() const;
  NaeReport symmetric_nae(const BiasFunction& f = {}) const;

  // Eq-(14)-style symmetric prices.
  double symmetric_nae_price(double alpha) const;
  double symmetric_nash_price() const;
};

// Symmetric NAE bias as a function of the slope ratio r = |b/c| (c > 0) and
// the number of firms; r > 1 required.
double symmetric_nae_alpha(double r, long long n);

// The two-firm motivating price game: q_i = 20 - x_i + 0.8 x_{-i}, pi = x q.
LinearPriceMarket motivating_example();

// Two-firm advertising competition with demand a_i + b_i sqrt(x_i)
// + c_i sqrt(x_i x_{-i}) and margin p_i per unit.
struct AdvertisingMarket {
  std::array<double, 2> a{}, b{}, c{}, p{};

  static AdvertisingMarket make(std::array<double, 2> a, std::array<double, 2> b,
                                std::array<double, 2> c, std::array<double, 2> p);

  std::array<double, 2> budget_cap() const;  // finite only when c < 0
  GameSpec game() const;

  // Closed-form alpha-equilibrium budgets.
  std::array<double, 2> alpha_equilibrium(const std::array<double, 2>& alpha) const;
  std::array<double, 2> nash() const { return alpha_equilibrium({1.0, 1.0}); }

  // Symmetric overestimation 2 / (1 + sqrt(1 - c1 c2 p1 p2)), the quadratic
  // root in (1, 2); the other root fails the SOC.
  double nae_alpha() const;
  NaeReport nae(const BiasFunction& f = {}) const;
};

// Team production with q_i(x) = theta (prod_j x_j)^gamma and pi_i = q_i - x_i;
// n gamma < 1 keeps payoffs concave with bounded replies.
struct TeamProductionSpec {
  int n = 2;
  double theta = 10.0;
  double gamma = 0.3;

  static TeamProductionSpec make(int n, double theta, double gamma);

  GameSpec game() const;

  // Lowest Nash equilibrium by best-reply iteration from a near-zero
  // symmetric profile (monotone increasing under complements).
  Vec lowest_nash() const;

  NaeReport nae(const BiasFunction& f = {}, NaeSettings settings = {}) const;
};

// Three-firm circle game: q_i = 120 - x_i - x_{i+1} - eps x_{i+2}.
GameSpec circle_game(double eps = 0.01);

}  // namespace naeq
