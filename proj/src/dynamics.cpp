#include "naeq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "naeq/rng.hpp"

namespace naeq {

namespace {

double max_rel_gap(const Vec& x, const Vec& y) {
  double d = 0.0;
  for (size_t i = 0; i < x.size(); ++i)
    d = std::max(d, std::fabs(x[i] - y[i]) / std::max(1.0, std::fabs(y[i])));
  return d;
}

Vec quantize(const Vec& alpha, double grid) {
  Vec out(alpha.size());
  for (size_t i = 0; i < alpha.size(); ++i) out[i] = std::round(alpha[i] / grid) * grid;
  return out;
}

}  // namespace

Trajectory run_adjustment(const GameSpec& game, const BiasFunction& f, const BiasProfile& bias,
                          const AdjustmentConfig& cfg) {
  require(cfg.step > 0.0, ErrorCode::config_error, "step size must be positive");
  const int n = game.players();
  if (cfg.rule == UpdateRule::elasticity_threshold)
    require(game.kind() == GameKind::linear_price || game.kind() == GameKind::circle_example,
            ErrorCode::config_error, "elasticity rule only applies to price games");

  Trajectory out;
  SolveReport ref = solve_alpha_equilibrium(game, f, bias, cfg.reference);
  out.fixed_point = ref.x;

  Vec x = cfg.initial;
  if (x.empty()) {
    x.resize(n);
    for (int i = 0; i < n; ++i) x[i] = game.interval(i).start_point();
  }
  out.path.push_back(x);

  for (int t = 0; t < cfg.max_steps; ++t) {
    Vec next = x;
    bool bad = false;
    if (cfg.rule == UpdateRule::perceived_gradient) {
      for (int i = 0; i < n; ++i) {
        const double g = perceived_marginal_profit(game, f, bias, x, i);
        next[i] = game.interval(i).clamp(x[i] + cfg.step * g);
      }
    } else {
      // Raise the price while the perceived elasticity sits below one, cut it
      // above one; the no-change point is the perceived-FOC fixed point.
      const Vec q = game.demand(x);
      for (int i = 0; i < n; ++i) {
        if (q[i] <= 0.0 || x[i] <= 0.0) {
          bad = true;
          break;
        }
        const double sens = f.apply(demand_sensitivity(game, x, i, i), bias.alpha[i]);
        const double elasticity = -(x[i] / q[i]) * sens;
        next[i] = game.interval(i).clamp(x[i] * (1.0 + cfg.step * (1.0 - elasticity)));
      }
    }
    x = next;
    out.steps = t + 1;
    double norm = 0.0;
    for (double v : x) norm = std::max(norm, std::fabs(v));
    if (bad || !std::isfinite(norm) || norm > cfg.divergence_bound) {
      out.diverged = true;
      break;
    }
    if ((t + 1) % cfg.record_every == 0) out.path.push_back(x);
    out.final_distance = max_rel_gap(x, out.fixed_point);
    if (out.final_distance <= cfg.tolerance) {
      out.converged = true;
      break;
    }
  }
  if (out.path.back() != x) out.path.push_back(x);
  if (!out.diverged) out.final_distance = max_rel_gap(x, out.fixed_point);
  return out;
}

ReplacementResult run_replacement(const GameSpec& game, const BiasFunction& f,
                                  const ReplacementConfig& cfg) {
  const int n = game.players();
  require(cfg.p_max >= 0.0 && cfg.p_max <= 1.0, ErrorCode::config_error,
          "replacement probability ceiling in [0, 1]");
  require(cfg.horizon >= 1, ErrorCode::config_error, "horizon must cover one review period");
  const bool finite_pool = !cfg.pool.empty();
  if (finite_pool)
    for (double a : cfg.pool)
      require(f.in_domain(a), ErrorCode::config_error, "pool bias outside feasible set");

  Vec alpha;
  if (!cfg.initial_alpha.empty()) {
    alpha = cfg.initial_alpha;
  } else if (finite_pool) {
    double best = cfg.pool.front();
    for (double a : cfg.pool)
      if (std::fabs(a - 1.0) < std::fabs(best - 1.0)) best = a;
    alpha.assign(n, best);
  } else {
    alpha.assign(n, 1.0);
  }

  Rng rng(cfg.seed, 3);
  ReplacementResult out;

  // Equilibria repeat across periods with few distinct bias profiles; memoize.
  std::map<Vec, SolveReport> cache;
  auto solve_profile = [&](const Vec& a) -> const SolveReport& {
    auto it = cache.find(a);
    if (it == cache.end()) {
      SolveReport rep = solve_alpha_equilibrium(game, f, BiasProfile{a}, cfg.inner);
      it = cache.emplace(a, std::move(rep)).first;
    }
    return it->second;
  };

  std::vector<std::deque<double>> trailing(n);
  struct Pending {
    bool active = false;
    double old_alpha = 1.0;
    double profit_before = 0.0;
  };
  std::vector<Pending> pending(n);
  std::map<Vec, long long> counts;
  long long valid = 0;

  for (long long period = 0; period < cfg.horizon; ++period) {
    const SolveReport& eq = solve_profile(alpha);
    if (!eq.converged()) {
      ++out.invalid_periods;
      continue;
    }
    const Vec profit = game.profits(eq.x);
    ++valid;
    counts[finite_pool ? alpha : quantize(alpha, 0.05)] += 1;
    if (period % cfg.record_every == 0)
      out.path.push_back(
          ReplacementPeriod{period * cfg.review_period, alpha, eq.x, profit});

    for (int i = 0; i < n; ++i) {
      // Revert decision first: a worse new analyst goes back.
      if (pending[i].active) {
        if (cfg.revert_on_worse && profit[i] < pending[i].profit_before) {
          alpha[i] = pending[i].old_alpha;
          ++out.reverts;
        }
        pending[i].active = false;
      }
      double trail = profit[i];
      if (!trailing[i].empty()) {
        trail = 0.0;
        for (double v : trailing[i]) trail += v;
        trail /= static_cast<double>(trailing[i].size());
      }
      trailing[i].push_back(profit[i]);
      if (static_cast<int>(trailing[i].size()) > cfg.trailing_window) trailing[i].pop_front();

      const double shortfall = trail - profit[i];
      const double p_replace = cfg.p_max / (1.0 + std::exp(-shortfall / cfg.logistic_scale));
      if (rng.uniform01() < p_replace) {
        pending[i] = Pending{true, alpha[i], profit[i]};
        ++out.replacements;
        if (finite_pool) {
          alpha[i] = cfg.pool[rng.below(cfg.pool.size())];
        } else {
          const double prop = alpha[i] + cfg.mutation_scale * rng.normal();
          alpha[i] = std::min(std::max(prop, cfg.pool_interval.first), cfg.pool_interval.second);
        }
      }
    }
  }

  for (const auto& [profile, count] : counts) {
    const double share = static_cast<double>(count) / static_cast<double>(std::max<long long>(1, valid));
    out.occupancy[profile] = share;
    if (share > out.modal_share) {
      out.modal_share = share;
      out.modal_profile = profile;
    }
  }
  return out;
}

}  // namespace naeq
