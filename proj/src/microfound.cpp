#include "naeq/microfound.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "naeq/normal.hpp"
#include "naeq/rng.hpp"

namespace naeq {

namespace {

double batch_std_error(const std::vector<double>& batch_values) {
  const size_t n = batch_values.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : batch_values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : batch_values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / (static_cast<double>(n) * (n - 1.0)));
}

}  // namespace

void DiscountExperiment::validate() const {
  require(p_lo < p_hi, ErrorCode::config_error, "p_lo < p_hi required");
  require(mu_lo > 0.0 && mu_lo < 1.0, ErrorCode::config_error, "mu_lo in (0, 1) required");
  require(gamma1 >= 0.0 && gamma1 <= 1.0 && gamma2 >= 0.0 && gamma2 <= 1.0,
          ErrorCode::config_error, "sloppiness in [0, 1]");
  require(rho >= -1.0 && rho <= 1.0, ErrorCode::config_error, "correlation in [-1, 1]");
  require(b > 0.0, ErrorCode::config_error, "own slope must be positive");
  for (double cell : joint_cells())
    require(cell >= 0.0 && cell <= 1.0, ErrorCode::config_error,
            "joint price-cell probability outside [0, 1]");
}

std::array<double, 4> DiscountExperiment::joint_cells() const {
  const double gr = gamma1 * gamma2 * rho;
  const double muL = mu_lo;
  const double off = muL * (1.0 - muL) * (1.0 - gr);
  return {muL * muL + muL * (1.0 - muL) * gr, off, off,
          (1.0 - muL) * (1.0 - muL) + muL * (1.0 - muL) * gr};
}

DiscountResult discount_elasticity(const DiscountExperiment& e, SimMode mode) {
  e.validate();
  DiscountResult out;
  out.mode = mode;

  const double p_bar = e.mu_lo * e.p_lo + (1.0 - e.mu_lo) * e.p_hi;
  const double slope = e.b - e.c * e.gamma1 * e.gamma2 * e.rho;
  out.eta_true_consistent = e.b * p_bar / (e.a - (e.b - e.c) * p_bar);
  out.eta_true_variant = e.b * p_bar / (e.a - (e.b + e.c) * p_bar);
  out.implied_alpha = slope / e.b;

  if (mode == SimMode::analytic) {
    out.eta_hat = slope * p_bar / (e.a - (e.b - e.c) * p_bar);
    return out;
  }

  const std::array<double, 4> cells = e.joint_cells();
  const double c01 = cells[0];
  const double c02 = cells[0] + cells[1];
  const double c03 = cells[0] + cells[1] + cells[2];

  Rng rng(e.seed, 1);
  const int batches = 64;
  const long long per_batch = std::max<long long>(1, e.sample_size / batches);
  std::vector<double> batch_eta;
  double tot_q_lo = 0.0, tot_q_hi = 0.0, tot_p = 0.0, tot_q = 0.0;
  long long n_lo = 0, n_hi = 0, total = 0;

  for (int bi = 0; bi < batches; ++bi) {
    double q_lo = 0.0, q_hi = 0.0, p_sum = 0.0, q_sum = 0.0;
    long long m_lo = 0, m_hi = 0;
    for (long long t = 0; t < per_batch; ++t) {
      const double u = rng.uniform01();
      const int cell = u < c01 ? 0 : (u < c02 ? 1 : (u < c03 ? 2 : 3));
      const double p_own = (cell == 0 || cell == 1) ? e.p_lo : e.p_hi;
      const double p_rival = (cell == 0 || cell == 2) ? e.p_lo : e.p_hi;
      const double q = e.a - e.b * p_own + e.c * p_rival;
      if (p_own == e.p_lo) {
        q_lo += q;
        ++m_lo;
      } else {
        q_hi += q;
        ++m_hi;
      }
      p_sum += p_own;
      q_sum += q;
    }
    tot_q_lo += q_lo;
    tot_q_hi += q_hi;
    tot_p += p_sum;
    tot_q += q_sum;
    n_lo += m_lo;
    n_hi += m_hi;
    total += per_batch;
    if (m_lo > 0 && m_hi > 0) {
      const double dq = q_hi / m_hi - q_lo / m_lo;
      const double dp = e.p_hi - e.p_lo;
      batch_eta.push_back(-(dq / (q_sum / per_batch)) / (dp / (p_sum / per_batch)));
    }
  }
  require(n_lo > 0 && n_hi > 0, ErrorCode::insufficient_variation,
          "one price arm received no observations");

  const double dq = tot_q_hi / n_hi - tot_q_lo / n_lo;
  const double dp = e.p_hi - e.p_lo;
  out.eta_hat = -(dq / (tot_q / total)) / (dp / (tot_p / total));
  out.std_error = batch_std_error(batch_eta);
  out.n_lo = n_lo;
  out.n_hi = n_hi;
  out.implied_alpha = (-dq / dp) / e.b;
  return out;
}

void AdTargetingExperiment::validate() const {
  require(x_hi > x_lo && x_lo >= 0.0, ErrorCode::config_error, "budgets need x_hi > x_lo >= 0");
  require(horizon >= 2, ErrorCode::config_error, "horizon too short");
}

AdTargetingResult ad_targeting_bias(const AdTargetingExperiment& e, SimMode mode) {
  e.validate();
  AdTargetingResult out;
  out.mode = mode;

  const double d = e.x_hi - e.x_lo;
  const double r_lo = normal_pdf(-e.x_lo) / normal_cdf(-e.x_lo);
  const double r_hi = normal_pdf(e.x_hi) / normal_cdf(e.x_hi);
  const double up = 1.0 + r_lo / d;
  out.closed_form_estimate = 0.5 * (up + (1.0 - r_hi / d));
  out.exact_estimate = 0.5 * (up + (1.0 + r_hi / d));
  out.note =
      "the closed form carries the cut-branch truncation term with a negative sign; "
      "the simulated estimator's expectation carries it with a positive sign";

  if (mode == SimMode::analytic) {
    out.estimate = out.closed_form_estimate;
    out.up_branch = up;
    out.down_branch = 1.0 - r_hi / d;
    return out;
  }

  Rng rng(e.seed, 2);
  const int batches = static_cast<int>(std::min<long long>(100, std::max<long long>(2, e.horizon / 1000)));
  const long long per_batch = e.horizon / batches;
  std::vector<double> batch_est;
  double up_sum = 0.0, dn_sum = 0.0;
  long long up_n = 0, dn_n = 0;

  double x_prev = e.x_lo;
  double sales_prev = e.mean_sales + x_prev + rng.normal();
  for (int bi = 0; bi < batches; ++bi) {
    double b_up = 0.0, b_dn = 0.0;
    long long b_up_n = 0, b_dn_n = 0;
    for (long long t = 1; t < per_batch; ++t) {
      const double x_t = sales_prev < e.mean_sales ? e.x_hi : e.x_lo;
      const double sales_t = e.mean_sales + x_t + rng.normal();
      if (x_t != x_prev) {
        const double ratio = (sales_t - sales_prev) / (x_t - x_prev);
        if (x_t > x_prev) {
          b_up += ratio;
          ++b_up_n;
        } else {
          b_dn += ratio;
          ++b_dn_n;
        }
      }
      x_prev = x_t;
      sales_prev = sales_t;
    }
    up_sum += b_up;
    dn_sum += b_dn;
    up_n += b_up_n;
    dn_n += b_dn_n;
    if (b_up_n > 0 && b_dn_n > 0)
      batch_est.push_back(0.5 * (b_up / b_up_n + b_dn / b_dn_n));
  }
  require(up_n > 0 && dn_n > 0, ErrorCode::no_switches,
          "the budget policy never alternated in the sampled horizon");

  out.up_branch = up_sum / up_n;
  out.down_branch = dn_sum / dn_n;
  out.estimate = 0.5 * (out.up_branch + out.down_branch);
  out.std_error = batch_std_error(batch_est);
  out.up_count = up_n;
  out.down_count = dn_n;
  return out;
}

double shock_discount_alpha(const ShockDiscountSpec& s) {
  require(s.discount > 0.0, ErrorCode::config_error, "discount size must be positive");
  require(s.shock >= 0.0, ErrorCode::config_error, "shock magnitude must be non-negative");
  require(2.0 * s.shock < s.discount, ErrorCode::non_positive_alpha,
          "shock too large: implied bias would leave (0, 1]");
  return (s.discount - 2.0 * s.shock) / s.discount;
}

}  // namespace naeq
