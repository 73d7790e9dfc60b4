#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "naeq/dynamics.hpp"
#include "naeq/markets.hpp"

using namespace naeq;

TEST_CASE("perceived-gradient adjustment reaches the biased equilibrium") {
  BiasFunction f;
  GameSpec g = motivating_example().game();
  AdjustmentConfig cfg;
  cfg.initial = {17.0, 17.0};
  cfg.tolerance = 1e-9;
  BiasProfile naive{{0.6, 0.6}};
  Trajectory tr = run_adjustment(g, f, naive, cfg);
  REQUIRE(tr.converged);
  CHECK_FALSE(tr.diverged);
  CHECK(tr.fixed_point[0] == doctest::Approx(25.0).epsilon(1e-8));
  CHECK(std::fabs(tr.path.back()[0] - 25.0) < 1e-6);
  // Residual at the endpoint is inside the solver tolerance.
  CHECK(max_foc_residual(g, f, naive, tr.path.back()) <= 1e-6);
}

TEST_CASE("unbiased adjustment lands on the closed-form Nash point") {
  BiasFunction f;
  LinearPriceMarket m = motivating_example();
  GameSpec g = m.game();
  AdjustmentConfig cfg;
  cfg.initial = {28.5, 6.0};
  cfg.tolerance = 1e-9;
  Trajectory tr = run_adjustment(g, f, BiasProfile{{1.0, 1.0}}, cfg);
  REQUIRE(tr.converged);
  const Vec nash = m.nash();  // independent exact path
  CHECK(tr.path.back()[0] == doctest::Approx(nash[0]).epsilon(1e-6));
  CHECK(tr.path.back()[1] == doctest::Approx(nash[1]).epsilon(1e-6));
}

TEST_CASE("elasticity-threshold rule shares the perceived-FOC fixed point") {
  BiasFunction f;
  GameSpec g = motivating_example().game();
  AdjustmentConfig cfg;
  cfg.rule = UpdateRule::elasticity_threshold;
  cfg.step = 0.02;
  cfg.initial = {17.0, 17.0};
  cfg.tolerance = 1e-8;
  Trajectory tr = run_adjustment(g, f, BiasProfile{{0.6, 0.6}}, cfg);
  REQUIRE(tr.converged);
  CHECK(std::fabs(tr.path.back()[0] - 25.0) < 1e-5);

  SUBCASE("rule is rejected outside price games") {
    GameSpec team = TeamProductionSpec::make(2, 10.0, 0.3).game();
    CHECK_THROWS_AS(run_adjustment(team, f, BiasProfile{{1.0, 1.0}}, cfg), Error);
  }
}

TEST_CASE("oversized steps are reported as divergence") {
  BiasFunction f;
  GameSpec g = motivating_example().game();
  AdjustmentConfig cfg;
  cfg.step = 1.5;  // beyond the stability bound of the gradient map
  // Asymmetric start so the unstable difference mode is excited.
  cfg.initial = {2.0, 30.0};
  cfg.max_steps = 2000;
  cfg.divergence_bound = 1e6;
  Trajectory tr = run_adjustment(g, f, BiasProfile{{1.0, 1.0}}, cfg);
  CHECK(tr.diverged);
  CHECK_FALSE(tr.converged);
}

TEST_CASE("analyst replacement concentrates on the naive pair") {
  BiasFunction f;
  GameSpec g = motivating_example().game();
  ReplacementConfig cfg;
  cfg.pool = {0.6, 1.0};
  cfg.horizon = 10000;
  cfg.seed = 21;
  ReplacementResult res = run_replacement(g, f, cfg);
  REQUIRE(res.modal_profile.size() == 2);
  CHECK(res.modal_profile[0] == doctest::Approx(0.6));
  CHECK(res.modal_profile[1] == doctest::Approx(0.6));
  CHECK(res.modal_share > 0.5);
  CHECK(res.invalid_periods == 0);
  // Occupancy of the naive pair strictly exceeds every other profile.
  for (const auto& [profile, share] : res.occupancy)
    if (profile != res.modal_profile) CHECK(share < res.modal_share);

  SUBCASE("deterministic per seed") {
    ReplacementResult again = run_replacement(g, f, cfg);
    CHECK(again.modal_share == res.modal_share);
    CHECK(again.replacements == res.replacements);
  }
}

TEST_CASE("a monopolist keeps the sophisticated analyst") {
  BiasFunction f;
  // Single firm: alpha = 1 maximizes profit (100 against 93.75 at 0.6).
  GameSpec g = LinearPriceMarket::symmetric(20.0, 1.0, 1e-9, 1).game();
  const double pi_unbiased = g.profit(0, Vec{10.0});
  const double pi_naive = g.profit(0, Vec{12.5});
  CHECK(pi_unbiased == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(pi_naive == doctest::Approx(93.75).epsilon(1e-6));

  ReplacementConfig cfg;
  cfg.pool = {0.6, 1.0};
  cfg.horizon = 4000;
  cfg.seed = 5;
  ReplacementResult res = run_replacement(g, f, cfg);
  REQUIRE(res.modal_profile.size() == 1);
  CHECK(res.modal_profile[0] == doctest::Approx(1.0));
  CHECK(res.modal_share > 0.5);
}

TEST_CASE("zero replacement probability freezes the bias path") {
  BiasFunction f;
  GameSpec g = motivating_example().game();
  ReplacementConfig cfg;
  cfg.pool = {0.6, 1.0};
  cfg.initial_alpha = {1.0, 0.6};
  cfg.p_max = 0.0;
  cfg.horizon = 200;
  cfg.record_every = 1;
  ReplacementResult res = run_replacement(g, f, cfg);
  CHECK(res.replacements == 0);
  for (const auto& p : res.path) {
    CHECK(p.alpha[0] == doctest::Approx(1.0));
    CHECK(p.alpha[1] == doctest::Approx(0.6));
  }
  CHECK(res.modal_share == doctest::Approx(1.0));
}

TEST_CASE("occupancy is stable across seeds") {
  BiasFunction f;
  GameSpec g = motivating_example().game();
  ReplacementConfig cfg;
  cfg.pool = {0.6, 1.0};
  cfg.horizon = 10000;
  std::vector<double> shares;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    ReplacementResult res = run_replacement(g, f, cfg);
    shares.push_back(res.modal_share);
  }
  double mean = 0.0;
  for (double v : shares) mean += v;
  mean /= shares.size();
  for (double v : shares) {
    CHECK(std::fabs(v - mean) <= 0.05);
    CHECK(v > 0.5);
  }
}
