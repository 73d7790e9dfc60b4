#include "naeq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "naeq/rng.hpp"

namespace naeq {

namespace {

// Margin used to keep evaluations one step inside an interval endpoint.
double boundary_pad(const Interval& iv, double scale) {
  double pad = 1e-9 * std::max(1.0, std::fabs(scale));
  if (iv.bounded_above()) pad = std::min(pad, 1e-6 * iv.span());
  return pad;
}

struct Foc {
  const GameSpec& game;
  const BiasFunction& f;
  double alpha_i;
  Vec x;  // working profile; slot i is overwritten per evaluation
  int i;

  double operator()(double xi) {
    x[i] = xi;
    return perceived_marginal_profit(game, f, alpha_i, x, i);
  }
  double perceived_profit_slope_sign(double xi) { return (*this)(xi); }
};

// Safeguarded Newton inside a sign-change bracket [a, b] with g(a)*g(b) <= 0.
double polish_root(Foc& g, double a, double ga, double b, double gb) {
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  double mid = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    const double width = b - a;
    if (width <= 4.0 * 2.220446049250313e-16 * std::max(1.0, std::fabs(mid))) break;
    double gm = g(mid);
    if (gm == 0.0) return mid;
    // Keep the sign change.
    if ((ga < 0.0) != (gm < 0.0)) {
      b = mid;
      gb = gm;
    } else {
      a = mid;
      ga = gm;
    }
    // Newton proposal off the three-point slope; fall back to bisection when
    // it leaves the bracket.
    const double slope = (gb - ga) / (b - a);
    double next = (slope != 0.0 && std::isfinite(slope)) ? mid - gm / slope : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    mid = next;
  }
  return 0.5 * (a + b);
}

Vec default_start(const GameSpec& game) {
  Vec x(game.players());
  for (int i = 0; i < game.players(); ++i) x[i] = game.interval(i).start_point();
  return x;
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::non_convergence: return "non-convergence";
    case SolveStatus::soc_violation: return "soc-violation";
  }
  return "unknown";
}

double perceived_best_reply(const GameSpec& game, const BiasFunction& f, double alpha_i,
                            const Vec& x, int i) {
  const Interval& iv = game.interval(i);
  Foc g{game, f, alpha_i, x, i};

  const double pad = boundary_pad(iv, x[i]);
  const double lo = iv.lo + pad;
  const double hi = iv.bounded_above() ? iv.hi - pad : kInf;

  double x0 = std::min(std::max(x[i], lo), iv.bounded_above() ? hi : std::max(lo, x[i]));
  if (!std::isfinite(x0)) x0 = lo + 1.0;
  double g0 = g(x0);

  if (g0 == 0.0) {
    if (perceived_second_derivative(game, f, alpha_i, g.x, i) >= 0.0)
      raise(ErrorCode::soc_violation, "perceived FOC root is not a maximum");
    return x0;
  }

  // Walk uphill in perceived profit (direction of the FOC sign) with
  // geometrically growing steps until the FOC changes sign or the interval
  // endpoint caps the bracket.
  const double dir = g0 > 0.0 ? 1.0 : -1.0;
  double step = 0.25 * std::max(1.0, std::fabs(x0));
  double a = x0, ga = g0;
  double b = x0, gb = g0;
  bool bracketed = false;
  for (int it = 0; it < 200; ++it) {
    double cand = b + dir * step;
    step *= 2.0;
    bool capped = false;
    if (cand <= lo) {
      cand = lo;
      capped = true;
    }
    if (cand >= hi) {
      cand = hi;
      capped = true;
    }
    if (std::fabs(cand) > 1e12 * std::max(1.0, std::fabs(x0)))
      raise(ErrorCode::no_sign_change, "unbounded perceived improvement");
    const double gc = g(cand);
    if ((gc < 0.0) != (g0 < 0.0) || gc == 0.0) {
      if (b < cand) {
        a = b;
        ga = gb;
        b = cand;
        gb = gc;
      } else {
        a = cand;
        ga = gc;
      }
      bracketed = true;
      break;
    }
    b = cand;
    gb = gc;
    if (capped) {
      // Perceived profit is monotone toward this endpoint: for a finite
      // endpoint the boundary is the perceived maximizer, otherwise
      // improvement is unbounded.
      if (!std::isfinite(hi) && dir > 0.0)
        raise(ErrorCode::no_sign_change,
              "biased FOC has no root and no bounded boundary maximizer");
      return dir > 0.0 ? iv.hi : iv.lo;
    }
  }
  if (!bracketed) raise(ErrorCode::no_sign_change, "failed to bracket the biased FOC root");
  if (a > b) {
    std::swap(a, b);
    std::swap(ga, gb);
  }

  const double root = polish_root(g, a, ga, b, gb);
  g.x[i] = root;
  if (perceived_second_derivative(game, f, alpha_i, g.x, i) >= 0.0)
    raise(ErrorCode::soc_violation, "perceived FOC root is not a maximum");
  return root;
}

double kkt_residual(const GameSpec& game, const BiasFunction& f, double alpha_i, Vec x, int i) {
  const Interval& iv = game.interval(i);
  const double pad = boundary_pad(iv, x[i]);
  const bool at_lo = x[i] <= iv.lo + pad;
  const bool at_hi = iv.bounded_above() && x[i] >= iv.hi - pad;
  if (at_lo) x[i] = iv.lo + pad;
  if (at_hi) x[i] = iv.hi - pad;
  const double g = perceived_marginal_profit(game, f, alpha_i, x, i);
  if (at_lo) return std::max(0.0, g);
  if (at_hi) return std::max(0.0, -g);
  return std::fabs(g);
}

double max_foc_residual(const GameSpec& game, const BiasFunction& f, const BiasProfile& bias,
                        const Vec& x) {
  double r = 0.0;
  for (int i = 0; i < game.players(); ++i)
    r = std::max(r, kkt_residual(game, f, bias.alpha[i], x, i));
  return r;
}

namespace {

struct SweepResult {
  Vec x;
  double residual = kInf;
  int iterations = 0;
  bool converged = false;
};

SweepResult damped_sweep(const GameSpec& game, const BiasFunction& f, const BiasProfile& bias,
                         Vec x, const SolverSettings& s, int budget) {
  SweepResult out;
  const int n = game.players();
  double best_residual = kInf;
  Vec best_x = x;
  int since_improvement = 0;
  for (int it = 0; it < budget; ++it) {
    Vec br(n);
    for (int i = 0; i < n; ++i) br[i] = perceived_best_reply(game, f, bias.alpha[i], x, i);
    for (int i = 0; i < n; ++i)
      x[i] = game.interval(i).clamp((1.0 - s.damping) * x[i] + s.damping * br[i]);
    const double r = max_foc_residual(game, f, bias, x);
    out.iterations = it + 1;
    if (r < best_residual * 0.999) {
      best_residual = r;
      best_x = x;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (r <= s.tolerance) {
      out.x = x;
      out.residual = r;
      out.converged = true;
      return out;
    }
    if (since_improvement > 60) break;  // stalled
  }
  out.x = best_x;
  out.residual = best_residual;
  return out;
}

Vec random_start(const GameSpec& game, Rng& rng, const Vec& anchor) {
  Vec x(game.players());
  for (int i = 0; i < game.players(); ++i) {
    const Interval& iv = game.interval(i);
    const double reach = std::max(10.0, 4.0 * std::fabs(anchor[i]));
    const double hi = iv.bounded_above() ? iv.hi : anchor[i] + reach;
    const double lo = iv.bounded_below() ? iv.lo : anchor[i] - reach;
    const double pad = 1e-3 * (hi - lo);
    x[i] = rng.uniform(lo + pad, hi - pad);
  }
  return x;
}

bool distinct_point(const std::vector<Vec>& seen, const Vec& x) {
  for (const Vec& y : seen) {
    double d = 0.0;
    for (size_t k = 0; k < x.size(); ++k)
      d = std::max(d, std::fabs(x[k] - y[k]) / std::max(1.0, std::fabs(y[k])));
    if (d < 1e-6) return false;
  }
  return true;
}

}  // namespace

SolveReport solve_alpha_equilibrium(const GameSpec& game, const BiasFunction& f,
                                    const BiasProfile& bias, const SolverSettings& settings) {
  bias.validate(f);
  require(static_cast<int>(bias.alpha.size()) == game.players(), ErrorCode::invalid_argument,
          "bias profile length mismatch");

  Vec start = settings.initial.empty() ? default_start(game) : settings.initial;
  SweepResult main = damped_sweep(game, f, bias, start, settings, settings.max_iterations);

  SolveReport report;
  std::vector<Vec> fixed_points;
  if (main.converged) fixed_points.push_back(main.x);

  // Multi-start fallback; restarts only run after a stall to keep the common
  // path cheap.
  if (!main.converged && settings.multistarts > 0) {
    Rng rng(settings.seed, 7);
    const int budget = std::max(200, settings.max_iterations / 4);
    for (int k = 0; k < settings.multistarts; ++k) {
      Vec x0 = random_start(game, rng, main.x);
      SweepResult alt = damped_sweep(game, f, bias, x0, settings, budget);
      if (alt.converged && distinct_point(fixed_points, alt.x)) fixed_points.push_back(alt.x);
      if (alt.residual < main.residual) main = alt;
    }
  }

  report.x = main.x;
  report.residual = main.residual;
  report.iterations = main.iterations;
  report.status = main.converged ? SolveStatus::converged : SolveStatus::non_convergence;

  report.perceived_soc.resize(game.players());
  for (int i = 0; i < game.players(); ++i) {
    report.perceived_soc[i] =
        perceived_second_derivative(game, f, bias.alpha[i], report.x, i);
    // The SOC binds for interior stationary points; a corner solution only
    // needs the one-sided condition already in the residual.
    const Interval& iv = game.interval(i);
    const bool interior = report.x[i] > iv.lo + boundary_pad(iv, report.x[i]) &&
                          (!iv.bounded_above() || report.x[i] < iv.hi - boundary_pad(iv, report.x[i]));
    if (main.converged && interior && report.perceived_soc[i] >= 0.0)
      report.status = SolveStatus::soc_violation;
  }

  for (const Vec& fp : fixed_points)
    if (!report.x.empty() && distinct_point({report.x}, fp)) report.extra_fixed_points.push_back(fp);
  return report;
}

const SolveReport& require_converged(const SolveReport& report) {
  if (report.status == SolveStatus::soc_violation)
    raise(ErrorCode::soc_violation, "fixed point violates the perceived SOC");
  if (report.status != SolveStatus::converged) {
    std::ostringstream msg;
    msg << "best residual " << report.residual << " after " << report.iterations << " iterations";
    raise(ErrorCode::non_convergence, msg.str());
  }
  return report;
}

}  // namespace naeq
