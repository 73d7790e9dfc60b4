#pragma once

#include <cmath>
#include <functional>

#include "naeq/game.hpp"

namespace naeq::test {

// Brute-force 1-D maximizer: dense scan plus golden-section refinement.
// Deliberately independent of the solver code paths it checks.
inline double argmax_scan(const std::function<double(double)>& fn, double lo, double hi,
                          int points = 2001) {
  double best_x = lo, best_v = -kInf;
  for (int k = 0; k < points; ++k) {
    const double x = lo + (hi - lo) * k / (points - 1);
    const double v = fn(x);
    if (v > best_v) {
      best_v = v;
      best_x = x;
    }
  }
  double a = std::max(lo, best_x - (hi - lo) / (points - 1));
  double b = std::min(hi, best_x + (hi - lo) / (points - 1));
  const double phi = 0.61803398874989484820;
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  for (int it = 0; it < 200 && (b - a) > 1e-12 * std::max(1.0, std::fabs(a) + std::fabs(b)); ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - phi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (b - a);
      f2 = fn(x2);
    }
  }
  return 0.5 * (a + b);
}

// The motivating two-firm price game in raw evaluator form (no analytic
// derivatives), for exercising the finite-difference paths.
inline GameSpec motivating_game_fd() {
  DemandFn demand = [](const Vec& x) {
    return Vec{20.0 - x[0] + 0.8 * x[1], 20.0 - x[1] + 0.8 * x[0]};
  };
  ProfitFn profit = [](int, double x_i, double q_i) { return x_i * q_i; };
  return GameSpec(2, {Interval{0.0, kInf}, Interval{0.0, kInf}}, demand, profit,
                  GameKind::custom);
}

}  // namespace naeq::test
