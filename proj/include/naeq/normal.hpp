#pragma once

#include <cmath>

namespace naeq {

// Standard normal density and distribution. Phi goes through erfc, which is
// accurate to a few ulp, comfortably below the 1e-12 absolute error the
// analytic microfoundation oracles need.
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.39894228040143267793994605993438;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440084436210485); }

// Mean of a standard normal truncated above: E[z | z < t] = -phi(t)/Phi(t).
inline double truncated_mean_below(double t) { return -normal_pdf(t) / normal_cdf(t); }

// Mean of a standard normal truncated below: E[z | z > t] = phi(t)/(1 - Phi(t)).
inline double truncated_mean_above(double t) { return normal_pdf(t) / normal_cdf(-t); }

}  // namespace naeq
