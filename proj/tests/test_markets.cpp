#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"
#include "naeq/markets.hpp"
#include "naeq/rng.hpp"

using namespace naeq;

TEST_CASE("price alpha-equilibrium closed form") {
  BiasFunction f;
  LinearPriceMarket m = motivating_example();

  Vec x = m.alpha_equilibrium({0.6, 0.6});
  CHECK(x[0] == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(x[1] == doctest::Approx(25.0).epsilon(1e-12));

  SUBCASE("symmetric three-firm Nash matches the closed price") {
    LinearPriceMarket sym = LinearPriceMarket::symmetric(20, 1, 0.5, 3);
    Vec nash = sym.nash();
    // a / (2b - (1 + 1/n) c) = 20 / (2 - (4/3) * 0.5) = 15.
    CHECK(nash[0] == doctest::Approx(15.0).epsilon(1e-12));
    CHECK(sym.symmetric_nash_price() == doctest::Approx(15.0).epsilon(1e-12));
  }

  SUBCASE("exact path agrees with the generic solver") {
    Rng rng(5150);
    for (int k = 0; k < 10; ++k) {
      Vec alpha{rng.uniform(0.4, 2.0), rng.uniform(0.4, 2.0)};
      Vec closed = m.alpha_equilibrium(alpha);
      SolveReport rep = solve_alpha_equilibrium(m.game(), f, BiasProfile{alpha}, SolverSettings{});
      REQUIRE(rep.converged());
      CHECK(closed[0] == doctest::Approx(rep.x[0]).epsilon(1e-8));
      CHECK(closed[1] == doctest::Approx(rep.x[1]).epsilon(1e-8));
    }
  }
}

TEST_CASE("duopoly NAE closed form") {
  BiasFunction f;
  SUBCASE("motivating example gives 0.6 exactly") {
    LinearPriceMarket m = motivating_example();
    CHECK(m.duopoly_nae_alpha() == doctest::Approx(0.6).epsilon(1e-12));
    NaeReport rep = m.duopoly_nae(f);
    CHECK(rep.x_star[0] == doctest::Approx(25.0).epsilon(1e-10));
  }
  SUBCASE("asymmetric firms share one bias") {
    LinearPriceMarket m = LinearPriceMarket::duopoly_direct({20, 22}, {1, 2}, {0.5, 0.8});
    const double astar = m.duopoly_nae_alpha();
    CHECK(astar == doctest::Approx(std::sqrt(0.8)).epsilon(1e-12));
    // Deviation-grid oracle: the shared bias is deviation-proof for each firm.
    Vec xs = m.alpha_equilibrium({astar, astar});
    VerifySettings vs;
    vs.grid_points = 81;
    VerifyResult res = verify_nae(m.game(), f, BiasProfile{{astar, astar}}, xs, vs);
    CHECK(res.ok);
    // And the generic solver lands on the same bias pair.
    NaeSettings s;
    s.run_verify = false;
    NaeReport rep = solve_nae(m.game(), f, s);
    CHECK(rep.alpha_star[0] == doctest::Approx(astar).epsilon(1e-6));
    CHECK(rep.alpha_star[1] == doctest::Approx(astar).epsilon(1e-6));
  }
  SUBCASE("no cross effects, no bias") {
    LinearPriceMarket m = LinearPriceMarket::duopoly_direct({20, 20}, {1, 1}, {0, 0});
    CHECK(m.duopoly_nae_alpha() == doctest::Approx(1.0));
  }
}

TEST_CASE("symmetric oligopoly NAE bias") {
  SUBCASE("monopoly is unbiased") { CHECK(symmetric_nae_alpha(2.0, 1) == 1.0); }
  SUBCASE("three firms at b/c = 10/7") {
    LinearPriceMarket m = LinearPriceMarket::symmetric(20, 1, 0.7, 3);
    const double astar = m.symmetric_nae_alpha_value();
    // Quadratic root evaluated by hand: (1 + sqrt(23.0408...)) / (2 * 23/7).
    CHECK(astar == doctest::Approx(0.8826).epsilon(2e-4));
    // Cross-check against the n = 3 closed form in c and b.
    const double b = 1.0, c = 0.7;
    const double e7 = (c + std::sqrt(c * c - 36 * b * c + 36 * b * b)) / (6 * b - 2 * c);
    CHECK(astar == doctest::Approx(e7).epsilon(1e-12));
    // And against the generic solver.
    BiasFunction f;
    NaeSettings s;
    s.run_verify = false;
    NaeReport rep = solve_nae(m.game(), f, s);
    for (double a : rep.alpha_star) CHECK(a == doctest::Approx(astar).epsilon(1e-6));
  }
  SUBCASE("bias washes out in a large market") {
    CHECK(std::fabs(symmetric_nae_alpha(1.5, 10000) - 1.0) < 1e-3);
    CHECK(std::fabs(symmetric_nae_alpha(50.0, 10000) - 1.0) < 1e-3);
  }
  SUBCASE("monotone in the slope ratio and in the number of firms") {
    for (double r : {1.5, 2.0, 5.0, 20.0, 50.0}) {
      double prev = symmetric_nae_alpha(r, 2);
      CHECK(prev < 1.0);
      for (int n = 2; n <= 50; ++n) {
        const double cur = symmetric_nae_alpha(r, n + 1);
        CHECK(prev < cur);
        CHECK(cur < 1.0);
        prev = cur;
      }
    }
    double prev = symmetric_nae_alpha(1.5, 2);
    for (double r : {2.0, 3.0, 5.0, 10.0, 25.0, 50.0}) {
      const double cur = symmetric_nae_alpha(r, 2);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("advertising equilibrium closed form") {
  BiasFunction f;
  AdvertisingMarket m = AdvertisingMarket::make({1, 1}, {1, 1}, {0.5, 0.5}, {1, 1});

  auto x11 = m.alpha_equilibrium({1.0, 1.0});
  CHECK(x11[0] == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(x11[1] == doctest::Approx(4.0 / 9.0).epsilon(1e-12));

  SUBCASE("decoupled budgets") {
    AdvertisingMarket d = AdvertisingMarket::make({1, 1}, {1, 2}, {0, 0}, {1, 0.4});
    auto x = d.alpha_equilibrium({1.0, 1.0});
    CHECK(x[0] == doctest::Approx(0.25).epsilon(1e-12));         // (p b / 2)^2
    CHECK(x[1] == doctest::Approx(0.16).epsilon(1e-12));
  }
  SUBCASE("closed form matches the generic solver at the Nash point") {
    SolveReport rep =
        solve_alpha_equilibrium(m.game(), f, BiasProfile{{1.0, 1.0}}, SolverSettings{});
    REQUIRE(rep.converged());
    CHECK(rep.x[0] == doctest::Approx(x11[0]).epsilon(1e-8));
  }
  SUBCASE("degenerate reply system is rejected") {
    CHECK_THROWS_AS(m.alpha_equilibrium({20.0, 20.0}), Error);
  }
}

TEST_CASE("advertising NAE closed form") {
  BiasFunction f;
  SUBCASE("symmetric overestimation at one half") {
    AdvertisingMarket m = AdvertisingMarket::make({1, 1}, {1, 1}, {0.5, 0.5}, {1, 1});
    const double astar = m.nae_alpha();
    CHECK(astar == doctest::Approx(2.0 / (1.0 + std::sqrt(0.75))).epsilon(1e-12));
    CHECK(astar == doctest::Approx(1.0718).epsilon(1e-4));
    // Deviation-grid oracle.
    auto xs = m.alpha_equilibrium({astar, astar});
    VerifySettings vs;
    vs.grid_points = 81;
    vs.grid_hi = 3.0;
    VerifyResult res = verify_nae(m.game(), f, BiasProfile{{astar, astar}}, {xs[0], xs[1]}, vs);
    CHECK(res.ok);
  }
  SUBCASE("no interaction, no bias") {
    AdvertisingMarket m = AdvertisingMarket::make({1, 1}, {1, 1}, {0.0, 0.4}, {1, 1});
    CHECK(m.nae_alpha() == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("bias approaches two as the interaction saturates") {
    AdvertisingMarket m = AdvertisingMarket::make({1, 1}, {1, 1}, {0.999, 0.999}, {1, 1});
    const double astar = m.nae_alpha();
    CHECK(astar > 1.9);
    CHECK(astar < 2.0);
  }
}

TEST_CASE("team production NAE") {
  BiasFunction f;
  SUBCASE("two members are overconfident and overworked") {
    TeamProductionSpec t = TeamProductionSpec::make(2, 10.0, 0.3);
    Vec lne = t.lowest_nash();
    // Symmetric interior fixed point (gamma theta)^(1/(1-2 gamma)) = 3^2.5.
    CHECK(lne[0] == doctest::Approx(std::pow(3.0, 2.5)).epsilon(1e-10));
    NaeSettings s;
    s.verify.grid_points = 21;
    NaeReport rep = t.nae(f, s);
    REQUIRE(rep.converged);
    REQUIRE(rep.verified);
    for (int i = 0; i < 2; ++i) {
      CHECK(rep.alpha_star[i] > 1.0);
      CHECK(rep.x_star[i] > lne[i]);
      CHECK(rep.profits[i] > rep.nash_profits[i]);
    }
  }
  SUBCASE("three members keep the sign pattern") {
    TeamProductionSpec t = TeamProductionSpec::make(3, 10.0, 0.3);
    NaeSettings s;
    s.verify.grid_points = 15;
    NaeReport rep = t.nae(f, s);
    REQUIRE(rep.converged);
    for (int i = 0; i < 3; ++i) {
      CHECK(rep.alpha_star[i] > 1.0);
      CHECK(rep.x_star[i] > t.lowest_nash()[i]);
    }
  }
  SUBCASE("a single member is unbiased") {
    TeamProductionSpec t = TeamProductionSpec::make(1, 10.0, 0.3);
    NaeSettings s;
    s.verify.grid_points = 15;
    NaeReport rep = t.nae(f, s);
    CHECK(rep.alpha_star[0] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(rep.x_star[0] == doctest::Approx(std::pow(3.0, 1.0 / 0.7)).epsilon(1e-7));
  }
  SUBCASE("family invariants are validated") {
    CHECK_THROWS_AS(TeamProductionSpec::make(4, 10.0, 0.3), Error);
    CHECK_THROWS_AS(TeamProductionSpec::make(2, -1.0, 0.3), Error);
  }
}

TEST_CASE("closed forms agree with the generic solver across seeded instances") {
  BiasFunction f;
  Rng rng(777);
  NaeSettings s;
  s.run_verify = false;

  SUBCASE("price duopolies") {
    for (int k = 0; k < 10; ++k) {
      const double bt1 = rng.uniform(0.8, 2.0), bt2 = rng.uniform(0.8, 2.0);
      const double ct1 = rng.uniform(0.1, 0.7) * bt1, ct2 = rng.uniform(0.1, 0.7) * bt2;
      LinearPriceMarket m = LinearPriceMarket::duopoly_direct(
          {rng.uniform(10, 30), rng.uniform(10, 30)}, {bt1, bt2}, {ct1, ct2});
      const double astar = m.duopoly_nae_alpha();
      NaeReport rep = solve_nae(m.game(), f, s);
      REQUIRE(rep.converged);
      CHECK(std::fabs(rep.alpha_star[0] - astar) / astar <= 1e-6);
      Vec xs = m.alpha_equilibrium({astar, astar});
      CHECK(std::fabs(rep.x_star[0] - xs[0]) / xs[0] <= 1e-6);
    }
  }
  SUBCASE("advertising pairs") {
    for (int k = 0; k < 10; ++k) {
      const double c1 = rng.uniform(0.2, 0.6), c2 = rng.uniform(0.2, 0.6);
      AdvertisingMarket m = AdvertisingMarket::make(
          {rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)},
          {rng.uniform(0.5, 1.5), rng.uniform(0.5, 1.5)}, {c1, c2}, {1.0, 1.0});
      const double astar = m.nae_alpha();
      NaeReport rep = solve_nae(m.game(), f, s);
      REQUIRE(rep.converged);
      CHECK(std::fabs(rep.alpha_star[0] - astar) / astar <= 1e-6);
      CHECK(std::fabs(rep.alpha_star[1] - astar) / astar <= 1e-6);
    }
  }
}

TEST_CASE("application-level direction assertions") {
  BiasFunction f;
  Rng rng(31);
  SUBCASE("price competition underestimates elasticity and raises prices") {
    for (int k = 0; k < 6; ++k) {
      const double b = rng.uniform(0.8, 1.6);
      const double c = rng.uniform(0.2, 0.7) * b * (k % 2 == 0 ? 1.0 : -0.45);
      LinearPriceMarket m = LinearPriceMarket::duopoly_direct({20, 20}, {b, b}, {c, c});
      const double astar = m.duopoly_nae_alpha();
      CHECK(astar < 1.0);
      Vec xs = m.alpha_equilibrium({astar, astar});
      Vec xn = m.nash();
      GameSpec g = m.game();
      for (int i = 0; i < 2; ++i) {
        CHECK(xs[i] > xn[i] + 1e-8);
        CHECK(g.demand(xs)[i] > 0.0);  // demand positivity guard
      }
      // Pareto relation matches the sign of the cross effect.
      const double sgn = c > 0 ? 1.0 : -1.0;
      for (int i = 0; i < 2; ++i)
        CHECK(sgn * (g.profit(i, xs) - g.profit(i, xn)) > 1e-8);
    }
  }
  SUBCASE("advertising overestimates effectiveness and overspends") {
    for (int k = 0; k < 6; ++k) {
      const double c = rng.uniform(0.2, 0.6) * (k % 2 == 0 ? 1.0 : -0.8);
      AdvertisingMarket m = AdvertisingMarket::make({1, 1}, {1, 1}, {c, c}, {1, 1});
      const double astar = m.nae_alpha();
      CHECK(astar > 1.0);
      auto xs = m.alpha_equilibrium({astar, astar});
      auto xn = m.nash();
      GameSpec g = m.game();
      const double sgn = c > 0 ? 1.0 : -1.0;
      for (int i = 0; i < 2; ++i) {
        CHECK(xs[i] > xn[i] + 1e-8);
        CHECK(g.demand({xs[0], xs[1]})[i] > 0.0);
        CHECK(sgn * (g.profit(i, {xs[0], xs[1]}) - g.profit(i, {xn[0], xn[1]})) > 1e-8);
      }
    }
  }
}

TEST_CASE("market construction guards") {
  CHECK_THROWS_AS(LinearPriceMarket::weighted({20}, {1}, {1.5}, {1.0}), Error);  // |c| >= b
  CHECK_THROWS_AS(LinearPriceMarket::weighted({20, 20}, {1, 1}, {0.5, -0.5}, {0.5, 0.5}),
                  Error);  // mixed signs
  CHECK_THROWS_AS(LinearPriceMarket::weighted({20, 20}, {1, 1}, {0.5, 0.5}, {0.7, 0.7}),
                  Error);  // weights don't sum to one
  CHECK_THROWS_AS(AdvertisingMarket::make({1, 1}, {1, 1}, {1.2, 0.5}, {1, 1}), Error);
}
