#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "naeq/markets.hpp"
#include "naeq/rng.hpp"
#include "naeq/solver.hpp"

using namespace naeq;

TEST_CASE("perceived marginal profit on the motivating game") {
  BiasFunction f;
  GameSpec g = motivating_example().game();
  Vec x{25.0, 25.0};
  // Hand-evaluated: q - alpha * x = 15 - 0.6 * 25 and 15 - 25.
  CHECK(perceived_marginal_profit(g, f, 0.6, x, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(perceived_marginal_profit(g, f, 1.0, x, 0) == doctest::Approx(-10.0));

  SUBCASE("alpha = 1 reduces to the true total derivative") {
    Rng rng(404);
    GameSpec fd = test::motivating_game_fd();
    for (int k = 0; k < 20; ++k) {
      Vec p{rng.uniform(5.0, 30.0), rng.uniform(5.0, 30.0)};
      const double perceived = perceived_marginal_profit(fd, f, 1.0, p, 0);
      const double truth = total_profit_derivative(fd, p, 0, 0);
      CHECK(perceived == doctest::Approx(truth).epsilon(1e-8));
    }
  }

  SUBCASE("domain errors") {
    CHECK_THROWS_AS(perceived_marginal_profit(g, f, 0.6, Vec{-1.0, 25.0}, 0), Error);
  }
}

TEST_CASE("analytic derivatives agree with central differences") {
  // 100 seeded interior points per game, relative gap <= 1e-5.
  struct Case {
    GameSpec with;
    GameSpec without;
    Vec lo, hi;
  };
  auto strip = [](const GameSpec& g) {
    GameSpec base = g;
    return GameSpec(
        g.players(), g.intervals(), [base](const Vec& x) { return base.demand(x); },
        [base](int i, double x, double q) { return base.profit(i, x, q); }, GameKind::custom);
  };
  std::vector<Case> cases;
  {
    GameSpec g = motivating_example().game();
    cases.push_back({g, strip(g), {5, 5}, {30, 30}});
  }
  {
    GameSpec g = AdvertisingMarket::make({1, 1}, {1, 1}, {0.5, 0.5}, {1, 1}).game();
    cases.push_back({g, strip(g), {0.05, 0.05}, {2.0, 2.0}});
  }
  {
    GameSpec g = TeamProductionSpec::make(2, 10.0, 0.3).game();
    cases.push_back({g, strip(g), {2, 2}, {40, 40}});
  }
  {
    GameSpec g = circle_game(0.01);
    cases.push_back({g, strip(g), {5, 5, 5}, {70, 70, 70}});
  }
  Rng rng(20240);
  auto close_to = [](double u, double v) {
    return std::fabs(u - v) / std::max(1.0, std::fabs(u)) <= 1e-5;
  };
  for (auto& c : cases) {
    for (int k = 0; k < 100; ++k) {
      Vec x(c.with.players());
      for (int i = 0; i < c.with.players(); ++i) x[i] = rng.uniform(c.lo[i], c.hi[i]);
      for (int i = 0; i < c.with.players(); ++i) {
        DerivativeReport a = derivatives(c.with, x, i);
        DerivativeReport n = derivatives(c.without, x, i);
        CHECK(close_to(a.own_partial, n.own_partial));
        CHECK(close_to(a.demand_margin, n.demand_margin));
        CHECK(close_to(a.own_sensitivity, n.own_sensitivity));
        for (int j = 0; j < c.with.players(); ++j)
          CHECK(close_to(a.cross_sensitivity[j], n.cross_sensitivity[j]));
      }
    }
  }
}

TEST_CASE("derivative report closed forms for the linear price game") {
  LinearPriceMarket m = motivating_example();
  GameSpec g = m.game();
  Vec x{18.0, 21.0};
  Vec q = g.demand(x);
  DerivativeReport d = derivatives(g, x, 0);
  CHECK(d.own_partial == doctest::Approx(q[0]));
  CHECK(d.demand_margin == doctest::Approx(x[0]));
  CHECK(d.own_sensitivity == doctest::Approx(-1.0));  // -(b - w c) in direct form
  CHECK(d.cross_sensitivity[1] == doctest::Approx(0.8));
  CHECK(d.cross_second[1] == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(d.method == DerivMethod::analytic);
}

TEST_CASE("bias function properties") {
  BiasFunction f;
  Rng rng(606);
  for (int k = 0; k < 200; ++k) {
    const double sens = rng.uniform(-5.0, 5.0);
    const double a1 = rng.uniform(f.domain_lo, f.domain_hi);
    const double a2 = a1 + rng.uniform(0.01, 1.0);
    // Calibrated analysts report the truth; biased ones keep the sign and
    // scale magnitude monotonically.
    CHECK(f.apply(sens, 1.0) == sens);
    if (sens != 0.0) {
      CHECK(std::signbit(f.apply(sens, a1)) == std::signbit(sens));
      CHECK(std::fabs(f.apply(sens, a2)) > std::fabs(f.apply(sens, a1)));
    }
  }
}

TEST_CASE("bias profile validation and FOC inversion") {
  BiasFunction f;
  CHECK(f.in_domain(1.0));
  CHECK_FALSE(f.in_domain(0.0));
  BiasProfile bad{{0.6, -1.0}};
  CHECK_THROWS_AS(bad.validate(f), Error);
  // dpx + dpq * a * dqx = 0 at (15, 25, -1) gives a = 0.6.
  auto a = f.invert(15.0, 25.0, -1.0);
  REQUIRE(a.has_value());
  CHECK(*a == doctest::Approx(0.6));
  CHECK_FALSE(f.invert(15.0, 25.0, 0.0).has_value());
  CHECK_FALSE(f.invert(-15.0, 25.0, -1.0).has_value());
}

TEST_CASE("negate-relabel") {
  BiasFunction f;
  LinearPriceMarket m = motivating_example();
  GameSpec g = m.game();
  GameSpec neg = negate_relabel(g);

  SUBCASE("relabeled equilibrium is the negated original") {
    SolverSettings s;
    BiasProfile al{{0.6, 0.6}};
    SolveReport rep = solve_alpha_equilibrium(neg, f, al, s);
    REQUIRE(rep.converged());
    CHECK(rep.x[0] == doctest::Approx(-25.0).epsilon(1e-8));
    CHECK(rep.x[1] == doctest::Approx(-25.0).epsilon(1e-8));
  }

  SUBCASE("relabeling equivariance of residuals") {
    // x solves the original system iff -x solves the relabeled one.
    Rng rng(7);
    for (int k = 0; k < 10; ++k) {
      BiasProfile al{{rng.uniform(0.4, 1.6), rng.uniform(0.4, 1.6)}};
      SolveReport rep = solve_alpha_equilibrium(g, f, al, SolverSettings{});
      REQUIRE(rep.converged());
      Vec flipped{-rep.x[0], -rep.x[1]};
      CHECK(max_foc_residual(neg, f, al, flipped) <= 1e-8);
    }
  }

  SUBCASE("double relabel is the identity on evaluations") {
    GameSpec twice = negate_relabel(neg);
    Vec x{17.0, 22.0};
    CHECK(twice.demand(x)[0] == doctest::Approx(g.demand(x)[0]));
    CHECK(twice.profit(0, x) == doctest::Approx(g.profit(0, x)));
    CHECK(perceived_marginal_profit(twice, f, 0.8, x, 1) ==
          doctest::Approx(perceived_marginal_profit(g, f, 0.8, x, 1)).epsilon(1e-9));
  }
}

TEST_CASE("profile evaluation carries demands and profits") {
  GameSpec g = motivating_example().game();
  ProfileEval ev = evaluate(g, {25.0, 25.0});
  CHECK(ev.q[0] == doctest::Approx(15.0));
  CHECK(ev.pi[0] == doctest::Approx(375.0));
}

TEST_CASE("game construction guards") {
  DemandFn d = [](const Vec& x) { return Vec{1.0 - x[0]}; };
  ProfitFn p = [](int, double x, double q) { return x * q; };
  CHECK_THROWS_AS(GameSpec(0, {}, d, p), Error);
  CHECK_THROWS_AS(GameSpec(1, {Interval{2.0, 1.0}}, d, p), Error);
}
