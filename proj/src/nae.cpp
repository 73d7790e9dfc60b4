#include "naeq/nae.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "naeq/rng.hpp"

namespace naeq {

namespace {

constexpr double kGolden = 0.61803398874989484820458683436564;

int sign_of(double v, double tol) { return v > tol ? 1 : (v < -tol ? -1 : 0); }

bool symmetric_profile(const Vec& x, double tol) {
  for (size_t i = 1; i < x.size(); ++i)
    if (std::fabs(x[i] - x[0]) > tol * std::max(1.0, std::fabs(x[0]))) return false;
  return true;
}

}  // namespace

ConstrainedEquilibrium constrained_equilibrium(const GameSpec& game, const BiasFunction& f, int i,
                                               double x_i, const BiasProfile& alpha,
                                               const SolverSettings& settings) {
  const int n = game.players();
  require(game.interval(i).contains(x_i), ErrorCode::out_of_domain,
          "pinned strategy outside the player's interval");

  ConstrainedEquilibrium out;
  out.pinned_player = i;
  out.pinned_strategy = x_i;

  if (n == 1) {
    out.x = {x_i};
    out.status = SolveStatus::converged;
    out.residual = 0.0;
  } else {
    // Damped Jacobi over the followers with slot i frozen.
    auto sweep = [&](Vec x, int budget) {
      x[i] = x_i;
      double residual = kInf;
      for (int it = 0; it < budget; ++it) {
        Vec br = x;
        for (int k = 0; k < n; ++k)
          if (k != i) br[k] = perceived_best_reply(game, f, alpha.alpha[k], x, k);
        residual = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k == i) continue;
          x[k] =
              game.interval(k).clamp((1.0 - settings.damping) * x[k] + settings.damping * br[k]);
        }
        for (int k = 0; k < n; ++k)
          if (k != i) residual = std::max(residual, kkt_residual(game, f, alpha.alpha[k], x, k));
        if (residual <= settings.tolerance) break;
      }
      return std::make_pair(x, residual);
    };
    Vec start = settings.initial.empty() ? Vec(n, 0.0) : settings.initial;
    if (settings.initial.empty())
      for (int k = 0; k < n; ++k) start[k] = game.interval(k).start_point();
    auto [x, residual] = sweep(start, settings.max_iterations);
    if (residual > settings.tolerance && settings.multistarts > 0) {
      // Seeded restarts; distinct re-equilibrations are reported, the first
      // fixed point found is returned.
      Rng rng(settings.seed, 13);
      std::vector<Vec> found;
      for (int r = 0; r < settings.multistarts; ++r) {
        Vec x0(n);
        for (int k = 0; k < n; ++k) {
          const Interval& iv = game.interval(k);
          const double hi = iv.bounded_above() ? iv.hi : std::max(1.0, 4.0 * std::fabs(x[k]));
          const double lo = iv.bounded_below() ? iv.lo : -hi;
          x0[k] = rng.uniform(lo + 1e-3 * (hi - lo), hi - 1e-3 * (hi - lo));
        }
        auto [alt_x, alt_r] = sweep(x0, std::max(200, settings.max_iterations / 4));
        if (alt_r <= settings.tolerance) {
          bool fresh = true;
          for (const Vec& seen : found) {
            double d = 0.0;
            for (int k = 0; k < n; ++k)
              d = std::max(d, std::fabs(alt_x[k] - seen[k]) / std::max(1.0, std::fabs(seen[k])));
            fresh = fresh && d > 1e-6;
          }
          if (fresh && !found.empty()) out.ambiguous = true;
          found.push_back(alt_x);
          if (alt_r < residual) {
            x = alt_x;
            residual = alt_r;
          }
        }
      }
    }
    out.x = x;
    out.residual = residual;
    out.status =
        residual <= settings.tolerance ? SolveStatus::converged : SolveStatus::non_convergence;
  }

  // Bias rationalizing the pinned strategy at the resulting profile.
  try {
    const Vec q = game.demand(out.x);
    const double dpx = profit_partial_x(game, i, out.x[i], q[i]);
    const double dpq = profit_partial_q(game, i, out.x[i], q[i]);
    const double dqx = demand_sensitivity(game, out.x, i, i);
    std::optional<double> a = f.invert(dpx, dpq, dqx);
    if (a && f.in_domain(*a) && perceived_second_derivative(game, f, *a, out.x, i) < 0.0)
      out.implied_alpha = a;
  } catch (const Error&) {
    // Derivatives undefined at the pinned point: no rationalizing bias.
  }
  return out;
}

namespace {

struct LeaderObjective {
  const GameSpec& game;
  const BiasFunction& f;
  int i;
  const BiasProfile& alpha;
  SolverSettings inner;
  mutable Vec warm;  // warm start carried between evaluations

  double operator()(double xi) const {
    if (game.players() == 1) return game.profit(i, Vec{xi});
    SolverSettings s = inner;
    if (!warm.empty()) s.initial = warm;
    ConstrainedEquilibrium ce = constrained_equilibrium(game, f, i, xi, alpha, s);
    if (ce.status != SolveStatus::converged)
      raise(ErrorCode::non_convergence, "inner constrained equilibrium did not converge");
    warm = ce.x;
    return game.profit(i, ce.x);
  }
};

}  // namespace

LeaderResult stackelberg_best(const GameSpec& game, const BiasFunction& f, int i,
                              const BiasProfile& alpha, const LeaderSettings& settings,
                              const Vec& anchor) {
  const Interval& iv = game.interval(i);
  LeaderObjective obj{game, f, i, alpha, settings.inner, {}};

  // Scan window anchored on the current equilibrium scale.
  double center;
  if (!anchor.empty()) {
    center = anchor[i];
  } else {
    SolveReport eq = solve_alpha_equilibrium(game, f, alpha, settings.inner);
    center = eq.x[i];
  }
  const double pad = 1e-7 * std::max(1.0, std::fabs(center));
  double lo = std::max(iv.lo + pad, center > 0.0 ? 0.15 * center : center - 2.0);
  double hi = center + 2.0 * std::max(1.0, std::fabs(center));
  if (iv.bounded_above()) hi = std::min(hi, iv.hi - pad);
  if (lo >= hi) {
    lo = iv.lo + pad;
    hi = iv.bounded_above() ? iv.hi - pad : lo + 10.0;
  }

  for (int expansion = 0;; ++expansion) {
    if (expansion > settings.max_expansions)
      raise(ErrorCode::unbounded_objective, "leader payoff keeps improving toward the scan edge");
    const int m = settings.scan_points;
    int best_k = 0;
    double best_v = -kInf;
    for (int k = 0; k < m; ++k) {
      const double xi = lo + (hi - lo) * k / (m - 1);
      const double v = obj(xi);
      if (v > best_v) {  // strict: ties keep the smaller x_i
        best_v = v;
        best_k = k;
      }
    }
    const bool at_upper_edge = best_k == m - 1 && (!iv.bounded_above() || hi < iv.hi - 2.0 * pad);
    const bool at_lower_edge = best_k == 0 && lo > iv.lo + 2.0 * pad;
    if (at_upper_edge) {
      const double width = hi - lo;
      lo = hi - 0.25 * width;
      hi = hi + 2.0 * width;
      if (iv.bounded_above()) hi = std::min(hi, iv.hi - pad);
      continue;
    }
    if (at_lower_edge) {
      const double width = hi - lo;
      hi = lo + 0.25 * width;
      lo = std::max(iv.lo + pad, lo - 2.0 * width);
      continue;
    }

    // Golden-section inside the bracketing neighbors of the best grid point.
    double a = lo + (hi - lo) * std::max(0, best_k - 1) / (m - 1);
    double b = lo + (hi - lo) * std::min(m - 1, best_k + 1) / (m - 1);
    double x1 = b - kGolden * (b - a);
    double x2 = a + kGolden * (b - a);
    double f1 = obj(x1);
    double f2 = obj(x2);
    while (b - a > settings.golden_tol * std::max(1.0, std::fabs(a) + std::fabs(b))) {
      if (f1 > f2 || (f1 == f2 && x1 < x2)) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kGolden * (b - a);
        f1 = obj(x1);
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kGolden * (b - a);
        f2 = obj(x2);
      }
    }
    LeaderResult out;
    out.x_i = 0.5 * (a + b);
    out.value = obj(out.x_i);
    if (game.players() == 1) {
      out.profile = Vec{out.x_i};
    } else {
      ConstrainedEquilibrium ce =
          constrained_equilibrium(game, f, i, out.x_i, alpha, settings.inner);
      out.profile = ce.x;
    }
    return out;
  }
}

VerifyResult verify_nae(const GameSpec& game, const BiasFunction& f, const BiasProfile& alpha,
                        const Vec& x, const VerifySettings& settings) {
  const int n = game.players();
  VerifyResult res;
  res.best_deviation_payoff.assign(n, -kInf);
  const Vec base_profits = game.profits(x);

  res.ok = true;
  for (int i = 0; i < n; ++i) {
    res.best_deviation_payoff[i] = base_profits[i];
    for (int k = 0; k < settings.grid_points; ++k) {
      const double t = settings.grid_points == 1 ? 0.0 : static_cast<double>(k) / (settings.grid_points - 1);
      const double a_dev =
          std::exp(std::log(settings.grid_lo) + t * (std::log(settings.grid_hi) - std::log(settings.grid_lo)));
      BiasProfile dev = alpha;
      dev.alpha[i] = a_dev;
      SolverSettings inner = settings.inner;
      inner.initial = x;  // warm start from the candidate equilibrium
      SolveReport eq;
      try {
        eq = solve_alpha_equilibrium(game, f, dev, inner);
      } catch (const Error&) {
        ++res.inconclusive;
        continue;
      }
      if (!eq.converged()) {
        ++res.inconclusive;
        continue;
      }
      const double payoff = game.profit(i, eq.x);
      res.best_deviation_payoff[i] = std::max(res.best_deviation_payoff[i], payoff);
      const double improvement = payoff - base_profits[i];
      const double slack = settings.tolerance * std::max(1.0, std::fabs(base_profits[i]));
      if (improvement > res.worst_violation) {
        res.worst_violation = improvement;
        res.worst_player = i;
        res.worst_alpha = a_dev;
      }
      if (improvement > slack) res.ok = false;
    }
  }
  return res;
}

// Response-slope-weighted sum of cross sensitivities at x: the right-hand side
// of the bias characterization. Slopes by central differences of the pinned
// (n-1)-player equilibrium; tight inner tolerance keeps the difference honest.
static double response_slope_sum(const GameSpec& game, const BiasFunction& f,
                                 const BiasProfile& alpha, const Vec& x, int i,
                                 const SolverSettings& inner) {
  const int n = game.players();
  if (n == 1) return 0.0;
  const double h = 1e-4 * std::max(1.0, std::fabs(x[i]));
  SolverSettings s = inner;
  s.tolerance = std::min(inner.tolerance, 1e-12);
  s.initial = x;
  ConstrainedEquilibrium up = constrained_equilibrium(game, f, i, x[i] + h, alpha, s);
  ConstrainedEquilibrium dn = constrained_equilibrium(game, f, i, x[i] - h, alpha, s);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j == i) continue;
    const double dxj = (up.x[j] - dn.x[j]) / (2.0 * h);
    sum += dxj * demand_sensitivity(game, x, i, j);
  }
  return sum;
}

void characterization_residuals(const GameSpec& game, const BiasFunction& f,
                                const BiasProfile& alpha, const Vec& x,
                                const SolverSettings& inner, Vec& absolute, Vec& relative) {
  const int n = game.players();
  absolute.assign(n, 0.0);
  relative.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const double own = demand_sensitivity(game, x, i, i);
    const double gap = f.apply(own, alpha.alpha[i]) - own;
    const double slope_sum = response_slope_sum(game, f, alpha, x, i, inner);
    absolute[i] = gap - slope_sum;
    relative[i] = std::fabs(absolute[i]) / std::max({std::fabs(gap), std::fabs(slope_sum), 1e-8});
  }
}

DirectionClassification classify_directions(const AuditReport& audit, const NaeReport& nae,
                                            const Vec& nash) {
  DirectionClassification c;
  c.sign_comp = audit.sign_comp;
  c.sign_extr = audit.sign_extr;
  c.sign_partial = audit.sign_partial;
  require(c.sign_comp != 0 && c.sign_extr != 0 && c.sign_partial != 0,
          ErrorCode::indefinite_signs, "audit reports no constant sign triple");

  // Predictions from the sign triple: overestimation iff the triple product
  // is negative, the convention all four application classes satisfy. Reports
  // note the rule in use.
  c.predicted_br = c.sign_comp * c.sign_extr;
  c.predicted_alpha = -c.sign_partial * c.sign_extr * c.sign_comp;
  c.predicted_pareto = c.sign_comp;

  // Observed directions at the computed NAE (precomputed in the report).
  const int n = static_cast<int>(nae.alpha_star.size());
  int br_sign = 0, alpha_sign = 0;
  bool br_consistent = true, alpha_consistent = true;
  for (int i = 0; i < n; ++i) {
    const int s = sign_of(nae.alpha_star[i] - 1.0, 1e-9);
    if (i == 0) alpha_sign = s;
    alpha_consistent = alpha_consistent && s == alpha_sign;
  }
  for (int i = 0; i < n; ++i) {
    const int s = sign_of(nae.x_star[i] - nae.br_unbiased_at_star[i],
                          1e-7 * std::max(1.0, std::fabs(nae.x_star[i])));
    if (i == 0) br_sign = s;
    br_consistent = br_consistent && s == br_sign;
  }
  c.observed_alpha = alpha_consistent ? alpha_sign : 0;
  c.observed_br = br_consistent ? br_sign : 0;

  int pareto = 0;
  bool dominates = true, dominated = true;
  for (int i = 0; i < n; ++i) {
    dominates = dominates && nae.profits[i] > nae.nash_profits[i] + 1e-12;
    dominated = dominated && nae.profits[i] < nae.nash_profits[i] - 1e-12;
  }
  if (dominates) pareto = 1;
  if (dominated) pareto = -1;
  c.observed_pareto = pareto;
  c.symmetric_pair = symmetric_profile(nae.x_star, 1e-6) && symmetric_profile(nash, 1e-6);

  c.br_matches = c.observed_br == c.predicted_br;
  c.alpha_matches = c.observed_alpha == c.predicted_alpha;
  // The substitutes-side Pareto statement only binds for symmetric pairs.
  c.pareto_matches = (c.predicted_pareto == 1)
                         ? c.observed_pareto == 1
                         : (!c.symmetric_pair || c.observed_pareto == -1);
  return c;
}

NaeReport solve_nae(const GameSpec& game, const BiasFunction& f, const NaeSettings& settings) {
  const int n = game.players();
  NaeReport rep;

  if (settings.run_audit) {
    SamplingPlan plan =
        settings.audit_plan.box.empty() ? default_plan(game, f) : settings.audit_plan;
    rep.audit = audit_assumptions(game, f, plan);
    if (!rep.audit->all_passed()) {
      if (!settings.allow_failed_audit)
        raise(ErrorCode::invalid_argument,
              "game fails the assumption audit; set allow_failed_audit to proceed");
      rep.warnings.push_back("assumption audit failed; solving anyway");
    }
  }

  BiasProfile alpha{settings.initial_alpha.empty() ? Vec(static_cast<size_t>(n), 1.0)
                                                   : settings.initial_alpha};
  for (double& a : alpha.alpha) a = f.clamp(a);

  SolverSettings inner = settings.inner;
  SolveReport eq = solve_alpha_equilibrium(game, f, alpha, inner);
  Vec anchor = eq.x;

  int pinned_at_bound = 0;
  bool converged = false;
  int outer = 0;
  double last_delta = 1.0;
  for (; outer < settings.max_outer; ++outer) {
    // Inner tolerance tracks the outer gap: coarse solves suffice while the
    // bias profile is far from its fixed point; the endgame runs at full
    // precision so evaluation noise cannot stall the iteration.
    const bool endgame = last_delta < 100.0 * settings.alpha_tolerance;
    inner.tolerance = endgame ? settings.inner.tolerance
                              : std::min(1e-8, std::max(settings.inner.tolerance,
                                                        1e-6 * last_delta * last_delta));
    Vec implied(n);
    bool clipped = false;
    for (int i = 0; i < n; ++i) {
      // Bias satisfying the perceived FOC at the leader point, backed out via
      // the characterization identity f(dq/dx, a) - dq/dx = slope-weighted
      // cross sensitivities. First-order in the leader position, so the flat
      // payoff top around the argmax does not limit precision. In the endgame
      // the leader point and the current equilibrium coincide to first order,
      // and evaluating at the equilibrium sidesteps argmax noise entirely.
      Vec prof;
      if (endgame) {
        prof = anchor;
      } else {
        LeaderSettings ls = settings.leader;
        ls.inner = inner;
        prof = stackelberg_best(game, f, i, alpha, ls, anchor).profile;
      }
      const double own = demand_sensitivity(game, prof, i, i);
      const double sum = response_slope_sum(game, f, alpha, prof, i, inner);
      const double a = 1.0 + sum / own;
      if (!std::isfinite(a) || a <= 0.0) {
        implied[i] = alpha.alpha[i];
        clipped = true;
        continue;
      }
      implied[i] = f.clamp(a);
      clipped = clipped || implied[i] != a;
    }
    double delta = 0.0;
    for (int i = 0; i < n; ++i) delta = std::max(delta, std::fabs(implied[i] - alpha.alpha[i]));
    last_delta = delta;
    for (int i = 0; i < n; ++i)
      alpha.alpha[i] =
          f.clamp(alpha.alpha[i] + settings.alpha_damping * (implied[i] - alpha.alpha[i]));
    rep.alpha_trajectory.push_back(alpha.alpha);
    pinned_at_bound = clipped ? pinned_at_bound + 1 : 0;
    if (pinned_at_bound > 25)
      raise(ErrorCode::no_interior_nae, "implied bias keeps leaving the truncated domain");
    inner.initial = anchor;
    eq = solve_alpha_equilibrium(game, f, alpha, inner);
    anchor = eq.x;
    if (delta <= settings.alpha_tolerance) {
      converged = true;
      ++outer;
      break;
    }
  }

  rep.converged = converged;
  rep.outer_iterations = outer;
  rep.alpha_star = alpha.alpha;
  require_converged(eq);
  rep.x_star = eq.x;
  rep.extra_fixed_points = eq.extra_fixed_points;
  ProfileEval ev = evaluate(game, eq.x);
  rep.q_star = ev.q;
  rep.profits = ev.pi;
  if (!converged) {
    std::ostringstream msg;
    msg << "bias iteration did not reach tolerance in " << settings.max_outer << " rounds";
    rep.warnings.push_back(msg.str());
  }

  // Unbiased reference equilibrium and payoffs.
  SolverSettings nash_settings = settings.inner;
  if (!settings.nash_initial.empty()) nash_settings.initial = settings.nash_initial;
  SolveReport nash = solve_alpha_equilibrium(game, f, BiasProfile::unbiased(n), nash_settings);
  require_converged(nash);
  rep.x_nash = nash.x;
  rep.nash_profits = game.profits(nash.x);

  // Unbiased best replies at the NAE, for the direction classification.
  rep.br_unbiased_at_star.resize(n);
  for (int i = 0; i < n; ++i)
    rep.br_unbiased_at_star[i] = perceived_best_reply(game, f, 1.0, rep.x_star, i);

  characterization_residuals(game, f, alpha, rep.x_star, settings.inner,
                             rep.characterization_residual, rep.characterization_rel);

  if (settings.run_verify) {
    VerifySettings vs = settings.verify;
    vs.inner = settings.inner;
    rep.verify = verify_nae(game, f, alpha, rep.x_star, vs);
    rep.verified = rep.verify.ok;
    rep.stackelberg_gaps.resize(n);
    for (int i = 0; i < n; ++i)
      rep.stackelberg_gaps[i] = rep.profits[i] - rep.verify.best_deviation_payoff[i];
  }

  if (rep.audit) {
    if (rep.audit->passed.count("A5") &&
        rep.audit->passed.at("A5") == CheckResult::heuristic_pass)
      rep.warnings.push_back("bounded-reply check used numeric bracketing (heuristic pass)");
    try {
      rep.classification = classify_directions(*rep.audit, rep, rep.x_nash);
      rep.warnings.push_back(
          "bias-direction rule: overestimation iff comp * extr * partial < 0 "
          "(the convention the application classes satisfy)");
    } catch (const Error& e) {
      rep.warnings.push_back(e.what());
    }
  }
  return rep;
}

}  // namespace naeq
