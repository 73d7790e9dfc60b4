#pragma once

#include <cstdint>
#include <string>

#include "naeq/game.hpp"

namespace naeq {

enum class SimMode { analytic, monte_carlo };

// Price-discount experiment with sloppily monitored discount timing. The two
// firms' prices are drawn jointly with correlation rho in the gamma_1 gamma_2
// fraction of unmonitored periods.
struct DiscountExperiment {
  double a = 20.0, b = 1.0, c = 0.8;  // direct two-firm demand a - b p_i + c p_{-i}
  double p_lo = 20.0, p_hi = 24.0;
  double mu_lo = 0.5;                 // share of discounted periods
  double gamma1 = 1.0, gamma2 = 1.0;  // sloppiness levels
  double rho = 0.5;                   // price correlation when unmonitored
  long long sample_size = 1000000;
  std::uint64_t seed = 1;

  void validate() const;
  // Joint cell probabilities (LL, LH, HL, HH); exact sum of one by
  // construction.
  std::array<double, 4> joint_cells() const;
};

struct DiscountResult {
  double eta_hat = 0.0;             // estimated own-price elasticity
  double eta_true_consistent = 0.0; // true elasticity with the mean-demand denominator
  double eta_true_variant = 0.0;      // alternative variant with the (b + c) denominator
  double implied_alpha = 0.0;       // estimated slope over the true slope b
  double std_error = 0.0;           // zero in analytic mode
  long long n_lo = 0, n_hi = 0;
  SimMode mode = SimMode::analytic;
};

DiscountResult discount_elasticity(const DiscountExperiment& e, SimMode mode);

// Threshold advertising policy: raise the budget after below-target sales.
struct AdTargetingExperiment {
  double mean_sales = 50.0;
  double x_lo = 0.0, x_hi = 1.0;
  long long horizon = 1000000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct AdTargetingResult {
  double estimate = 0.0;        // headline value (closed form / MC mean)
  double up_branch = 0.0;       // raise-budget summand
  double down_branch = 0.0;     // cut-budget summand
  double closed_form_estimate = 0.0;  // closed form with the negative cut-branch term
  double exact_estimate = 0.0;  // conditional expectation of the simulated
                                // estimator (down branch 1 + r_H/d)
  double std_error = 0.0;
  long long up_count = 0, down_count = 0;
  SimMode mode = SimMode::analytic;
  std::string note;
};

// Analytic mode returns the closed form above as the headline estimate and
// the exact conditional expectation alongside it; the two differ in the sign
// of the truncated-normal term of the cut-budget branch (see note field).
// Monte-Carlo mode simulates the policy and applies the switch-conditioned
// difference estimator.
AdTargetingResult ad_targeting_bias(const AdTargetingExperiment& e, SimMode mode);

// The two-week discount-shock story: implied bias (dx - 2 eps) / dx.
struct ShockDiscountSpec {
  double discount = 1.0;  // dx > 0
  double shock = 0.0;     // eps >= 0, 2 eps < dx
};

double shock_discount_alpha(const ShockDiscountSpec& s);

}  // namespace naeq
