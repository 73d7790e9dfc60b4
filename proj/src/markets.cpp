#include "naeq/markets.hpp"

#include <algorithm>
#include <cmath>

namespace naeq {

namespace {

// Shared closed-form report plumbing: package (alpha*, x*) with the Nash
// reference, unbiased best replies and the characterization residuals.
NaeReport closed_form_report(const GameSpec& game, const BiasFunction& f, Vec alpha_star,
                             Vec x_star, Vec x_nash) {
  NaeReport rep;
  rep.converged = true;
  rep.alpha_star = std::move(alpha_star);
  rep.x_star = std::move(x_star);
  ProfileEval ev = evaluate(game, rep.x_star);
  rep.q_star = ev.q;
  rep.profits = ev.pi;
  rep.x_nash = std::move(x_nash);
  rep.nash_profits = game.profits(rep.x_nash);
  const int n = game.players();
  rep.br_unbiased_at_star.resize(n);
  for (int i = 0; i < n; ++i)
    rep.br_unbiased_at_star[i] = perceived_best_reply(game, f, 1.0, rep.x_star, i);
  characterization_residuals(game, f, BiasProfile{rep.alpha_star}, rep.x_star, SolverSettings{},
                   rep.characterization_residual, rep.characterization_rel);
  return rep;
}

}  // namespace

LinearPriceMarket LinearPriceMarket::weighted(Vec a, Vec b, Vec c, Vec w) {
  LinearPriceMarket m;
  m.a = std::move(a);
  m.b = std::move(b);
  m.c = std::move(c);
  m.w = std::move(w);
  const int n = m.players();
  require(n >= 1, ErrorCode::config_error, "price market needs at least one firm");
  require(m.b.size() == m.a.size() && m.c.size() == m.a.size() && m.w.size() == m.a.size(),
          ErrorCode::config_error, "parameter vectors must share one length");
  double wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    require(m.a[i] > 0.0, ErrorCode::config_error, "intercept a_i must be positive");
    require(m.b[i] > 0.0, ErrorCode::config_error, "own slope b_i must be positive");
    require(std::fabs(m.c[i]) < m.b[i], ErrorCode::config_error, "|c_i| < b_i required");
    require(m.w[i] > 0.0, ErrorCode::config_error, "weights must be positive");
    wsum += m.w[i];
    for (int j = 0; j < n; ++j)
      require(m.c[i] * m.c[j] >= 0.0, ErrorCode::config_error,
              "cross slopes must share one sign");
  }
  require(std::fabs(wsum - 1.0) <= 1e-12, ErrorCode::config_error, "weights must sum to one");
  for (int i = 0; i < n; ++i) {
    if (m.c[i] < 0.0) {
      double s = 0.0;
      for (int j = 0; j < n; ++j)
        if (j != i) s += std::fabs(m.c[j]) / m.b[j];
      require(s < 1.0 / m.w[i], ErrorCode::config_error,
              "complement cross-elasticities too large for consistent adaptation");
    }
  }
  if (n == 2) {
    m.b_tilde = {m.b[0] - m.c[0] * m.w[0], m.b[1] - m.c[1] * m.w[1]};
    m.c_tilde = {m.c[0] * m.w[1], m.c[1] * m.w[0]};
  }
  return m;
}

LinearPriceMarket LinearPriceMarket::duopoly_direct(Vec a, Vec bt, Vec ct) {
  require(a.size() == 2 && bt.size() == 2 && ct.size() == 2, ErrorCode::config_error,
          "direct form is two-firm");
  Vec b(2), c(2);
  for (int i = 0; i < 2; ++i) {
    c[i] = 2.0 * ct[i];
    b[i] = bt[i] + ct[i];
  }
  return weighted(std::move(a), std::move(b), std::move(c), Vec{0.5, 0.5});
}

LinearPriceMarket LinearPriceMarket::symmetric(double a, double b, double c, int n) {
  return weighted(Vec(n, a), Vec(n, b), Vec(n, c),
                  Vec(n, 1.0 / static_cast<double>(n)));
}

GameSpec LinearPriceMarket::game() const {
  const int n = players();
  const LinearPriceMarket m = *this;
  std::vector<Interval> box(n);
  for (int i = 0; i < n; ++i)
    box[i] = m.c[i] < 0.0 ? Interval{0.0, m.a[i] / m.b[i]} : Interval{0.0, kInf};
  DemandFn demand = [m, n](const Vec& x) {
    double xbar = 0.0;
    for (int j = 0; j < n; ++j) xbar += m.w[j] * x[j];
    Vec q(n);
    for (int i = 0; i < n; ++i) q[i] = m.a[i] - m.b[i] * x[i] + m.c[i] * xbar;
    return q;
  };
  ProfitFn profit = [](int, double x_i, double q_i) { return x_i * q_i; };
  AnalyticDerivatives d{
      [](int, double, double q_i) { return q_i; },
      [](int, double x_i, double) { return x_i; },
      [m](int i, int j, const Vec&) {
        double v = m.c[i] * m.w[j];
        if (i == j) v -= m.b[i];
        return v;
      }};
  return GameSpec(n, std::move(box), std::move(demand), std::move(profit),
                  GameKind::linear_price, d);
}

Vec LinearPriceMarket::alpha_equilibrium(const Vec& alpha) const {
  const int n = players();
  require(static_cast<int>(alpha.size()) == n, ErrorCode::invalid_argument,
          "bias profile length mismatch");
  Vec denom(n);
  double coef = 1.0, rhs = 0.0;
  for (int i = 0; i < n; ++i) {
    require(alpha[i] > 0.0, ErrorCode::out_of_domain, "bias must be positive");
    denom[i] = b[i] + alpha[i] * (b[i] - c[i] * w[i]);
    coef -= w[i] * c[i] / denom[i];
    rhs += w[i] * a[i] / denom[i];
  }
  require(std::fabs(coef) > 1e-14, ErrorCode::degenerate_denominator,
          "mean-price equation has a vanishing linear coefficient");
  const double xbar = rhs / coef;
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = (a[i] + c[i] * xbar) / denom[i];
  return x;
}

double LinearPriceMarket::duopoly_nae_alpha() const {
  require(players() == 2, ErrorCode::invalid_argument, "duopoly formula needs two firms");
  const double ratio = (c_tilde[0] * c_tilde[1]) / (b_tilde[0] * b_tilde[1]);
  require(ratio < 1.0, ErrorCode::complex_root, "cross slopes dominate own slopes");
  return std::sqrt(1.0 - ratio);
}

NaeReport LinearPriceMarket::duopoly_nae(const BiasFunction& f) const {
  const double astar = duopoly_nae_alpha();
  Vec alpha{astar, astar};
  return closed_form_report(game(), f, alpha, alpha_equilibrium(alpha), nash());
}

double symmetric_nae_alpha(double r, long long n) {
  require(r > 1.0, ErrorCode::config_error, "slope ratio |b/c| must exceed one");
  if (n == 1) return 1.0;
  const double beta = static_cast<double>(n) * r - 1.0;  // b~/c~ for c > 0
  const double nm2 = static_cast<double>(n) - 2.0;
  const double disc = (2.0 * beta - nm2) * (2.0 * beta - nm2) - 4.0 * (static_cast<double>(n) - 1.0);
  require(disc >= 0.0, ErrorCode::complex_root, "bias quadratic has no real root");
  return (nm2 + std::sqrt(disc)) / (2.0 * beta);
}

double LinearPriceMarket::symmetric_nae_alpha_value() const {
  const int n = players();
  for (int i = 1; i < n; ++i)
    require(a[i] == a[0] && b[i] == b[0] && c[i] == c[0] && std::fabs(w[i] - w[0]) < 1e-12,
            ErrorCode::invalid_argument, "symmetric formula requires identical firms");
  if (n == 1 || c[0] == 0.0) return 1.0;
  if (c[0] > 0.0) return symmetric_nae_alpha(b[0] / c[0], n);
  // Complement goods: solve the signed quadratic directly and keep the root
  // in (0, 1].
  const double beta = (b[0] - c[0] / n) / (c[0] / n);
  const double nm2 = static_cast<double>(n) - 2.0;
  const double disc = (2.0 * beta - nm2) * (2.0 * beta - nm2) - 4.0 * (n - 1.0);
  require(disc >= 0.0, ErrorCode::complex_root, "bias quadratic has no real root");
  const double r1 = (nm2 + std::sqrt(disc)) / (2.0 * beta);
  const double r2 = (nm2 - std::sqrt(disc)) / (2.0 * beta);
  for (double r : {r1, r2})
    if (r > 0.0 && r <= 1.0 + 1e-12) return std::min(r, 1.0);
  raise(ErrorCode::complex_root, "no admissible bias root in (0, 1]");
}

double LinearPriceMarket::symmetric_nae_price(double alpha) const {
  const int n = players();
  return a[0] / ((1.0 + alpha) * b[0] - c[0] * (1.0 + alpha / n));
}

double LinearPriceMarket::symmetric_nash_price() const {
  const int n = players();
  return a[0] / (2.0 * b[0] - (1.0 + 1.0 / n) * c[0]);
}

NaeReport LinearPriceMarket::symmetric_nae(const BiasFunction& f) const {
  const double astar = symmetric_nae_alpha_value();
  Vec alpha(a.size(), astar);
  return closed_form_report(game(), f, alpha, alpha_equilibrium(alpha), nash());
}

LinearPriceMarket motivating_example() {
  return LinearPriceMarket::duopoly_direct({20.0, 20.0}, {1.0, 1.0}, {0.8, 0.8});
}

AdvertisingMarket AdvertisingMarket::make(std::array<double, 2> a, std::array<double, 2> b,
                                          std::array<double, 2> c, std::array<double, 2> p) {
  AdvertisingMarket m{a, b, c, p};
  require(c[0] * c[1] >= 0.0, ErrorCode::config_error, "interaction signs must coincide");
  for (int i = 0; i < 2; ++i) {
    require(a[i] >= 0.0 && b[i] > 0.0 && p[i] > 0.0, ErrorCode::config_error,
            "advertising parameters out of range");
    require(std::fabs(c[i]) < 1.0 / p[i], ErrorCode::config_error, "|c_i| < 1/p_i required");
    if (c[i] < 0.0) {
      require(std::fabs(c[i]) < b[i] / (b[1 - i] * p[1 - i]), ErrorCode::config_error,
              "negative externality too strong");
      require(std::fabs(c[i]) < b[i], ErrorCode::config_error,
              "own effect must dominate the rival externality");
    }
  }
  return m;
}

std::array<double, 2> AdvertisingMarket::budget_cap() const {
  std::array<double, 2> cap{kInf, kInf};
  for (int i = 0; i < 2; ++i)
    if (c[i] < 0.0) cap[i] = b[1 - i] / std::fabs(c[1 - i]);
  return cap;
}

GameSpec AdvertisingMarket::game() const {
  const AdvertisingMarket m = *this;
  const std::array<double, 2> cap = budget_cap();
  std::vector<Interval> box{{0.0, cap[0]}, {0.0, cap[1]}};
  DemandFn demand = [m](const Vec& x) {
    Vec q(2);
    for (int i = 0; i < 2; ++i)
      q[i] = m.a[i] + m.b[i] * std::sqrt(x[i]) + m.c[i] * std::sqrt(x[i] * x[1 - i]);
    return q;
  };
  ProfitFn profit = [m](int i, double x_i, double q_i) { return m.p[i] * q_i - x_i; };
  AnalyticDerivatives d{
      [](int, double, double) { return -1.0; },
      [m](int i, double, double) { return m.p[i]; },
      [m](int i, int j, const Vec& x) {
        if (i == j)
          return (m.b[i] + m.c[i] * std::sqrt(x[1 - i])) / (2.0 * std::sqrt(x[i]));
        return m.c[i] * std::sqrt(x[i]) / (2.0 * std::sqrt(x[j]));
      }};
  return GameSpec(2, std::move(box), std::move(demand), std::move(profit), GameKind::advertising,
                  d);
}

std::array<double, 2> AdvertisingMarket::alpha_equilibrium(
    const std::array<double, 2>& alpha) const {
  const double den = 4.0 - p[0] * p[1] * alpha[0] * alpha[1] * c[0] * c[1];
  require(den > 0.0, ErrorCode::degenerate_denominator,
          "biased reply system has no interior solution");
  std::array<double, 2> x{};
  for (int i = 0; i < 2; ++i) {
    const double root =
        p[i] * alpha[i] * (2.0 * b[i] + c[i] * p[1 - i] * alpha[1 - i] * b[1 - i]) / den;
    x[i] = root * root;
  }
  return x;
}

double AdvertisingMarket::nae_alpha() const {
  const double prod = c[0] * c[1] * p[0] * p[1];
  require(prod < 1.0, ErrorCode::complex_root, "interaction product must stay below one");
  return 2.0 / (1.0 + std::sqrt(1.0 - prod));
}

NaeReport AdvertisingMarket::nae(const BiasFunction& f) const {
  const double astar = nae_alpha();
  const std::array<double, 2> xs = alpha_equilibrium({astar, astar});
  const std::array<double, 2> xn = nash();
  return closed_form_report(game(), f, Vec{astar, astar}, Vec{xs[0], xs[1]}, Vec{xn[0], xn[1]});
}

TeamProductionSpec TeamProductionSpec::make(int n, double theta, double gamma) {
  require(n >= 1, ErrorCode::config_error, "team needs at least one member");
  require(theta > 0.0, ErrorCode::config_error, "scale theta must be positive");
  require(gamma > 0.0 && n * gamma < 1.0, ErrorCode::config_error,
          "exponent must satisfy 0 < n*gamma < 1");
  return TeamProductionSpec{n, theta, gamma};
}

GameSpec TeamProductionSpec::game() const {
  const TeamProductionSpec t = *this;
  std::vector<Interval> box(n, Interval{0.0, kInf});
  DemandFn demand = [t](const Vec& x) {
    double prod = 1.0;
    for (double v : x) prod *= std::pow(v, t.gamma);
    return Vec(static_cast<size_t>(t.n), t.theta * prod);
  };
  ProfitFn profit = [](int, double x_i, double q_i) { return q_i - x_i; };
  AnalyticDerivatives d{
      [](int, double, double) { return -1.0; },
      [](int, double, double) { return 1.0; },
      [t](int, int j, const Vec& x) {
        double prod = 1.0;
        for (double v : x) prod *= std::pow(v, t.gamma);
        return t.gamma * t.theta * prod / x[j];
      }};
  return GameSpec(n, std::move(box), std::move(demand), std::move(profit),
                  GameKind::team_production, d);
}

Vec TeamProductionSpec::lowest_nash() const {
  // x_i <- (gamma theta prod_{j != i} x_j^gamma)^(1/(1-gamma)); monotone from
  // below under strategic complements.
  Vec x(n, 1e-4);
  for (int it = 0; it < 200000; ++it) {
    double max_rel = 0.0;
    Vec nx(n);
    for (int i = 0; i < n; ++i) {
      double others = 1.0;
      for (int j = 0; j < n; ++j)
        if (j != i) others *= std::pow(x[j], gamma);
      nx[i] = std::pow(gamma * theta * others, 1.0 / (1.0 - gamma));
      max_rel = std::max(max_rel, std::fabs(nx[i] - x[i]) / std::max(1.0, std::fabs(x[i])));
    }
    x = nx;
    if (max_rel < 1e-14) break;
  }
  return x;
}

NaeReport TeamProductionSpec::nae(const BiasFunction& f, NaeSettings settings) const {
  const Vec lne = lowest_nash();
  settings.nash_initial = lne;
  if (settings.inner.initial.empty()) settings.inner.initial = lne;
  NaeReport rep = solve_nae(game(), f, settings);
  return rep;
}

GameSpec circle_game(double eps) {
  require(eps > 0.0 && eps < 1.0, ErrorCode::config_error, "eps in (0, 1) expected");
  std::vector<Interval> box(3, Interval{0.0, 120.0});
  DemandFn demand = [eps](const Vec& x) {
    Vec q(3);
    for (int i = 0; i < 3; ++i) q[i] = 120.0 - x[i] - x[(i + 1) % 3] - eps * x[(i + 2) % 3];
    return q;
  };
  ProfitFn profit = [](int, double x_i, double q_i) { return x_i * q_i; };
  AnalyticDerivatives d{
      [](int, double, double q_i) { return q_i; },
      [](int, double x_i, double) { return x_i; },
      [eps](int i, int j, const Vec&) {
        if (i == j) return -1.0;
        if (j == (i + 1) % 3) return -1.0;
        return -eps;
      }};
  return GameSpec(3, std::move(box), std::move(demand), std::move(profit),
                  GameKind::circle_example, d);
}

}  // namespace naeq
