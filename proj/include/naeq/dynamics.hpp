#pragma once

#include <map>

#include "naeq/solver.hpp"

namespace naeq {

enum class UpdateRule { perceived_gradient, elasticity_threshold };

// Within-period strategy adjustment toward an alpha-equilibrium.
struct AdjustmentConfig {
  double step = 0.05;
  int max_steps = 100000;
  double tolerance = 1e-8;
  Vec initial;
  UpdateRule rule = UpdateRule::perceived_gradient;
  double divergence_bound = 1e9;
  int record_every = 1;
  SolverSettings reference;  // for the fixed point the path is checked against
};

struct Trajectory {
  std::vector<Vec> path;
  Vec fixed_point;
  double final_distance = kInf;
  int steps = 0;
  bool converged = false;
  bool diverged = false;
};

Trajectory run_adjustment(const GameSpec& game, const BiasFunction& f, const BiasProfile& bias,
                          const AdjustmentConfig& cfg);

// Analyst hire/fire process: each review period plays the current
// alpha-equilibrium, then every firm independently replaces its analyst with a
// probability that falls with profit (logistic in the shortfall against the
// firm's own trailing average).
struct ReplacementConfig {
  Vec pool;                       // finite candidate biases; empty: continuous
  std::pair<double, double> pool_interval = {0.05, 20.0};
  double mutation_scale = 0.0;    // stddev of continuous mutations
  int review_period = 1;          // periods between reviews (profits repeat inside)
  double p_max = 0.2;             // replacement probability ceiling
  double logistic_scale = 10.0;   // profit-shortfall scale
  int trailing_window = 5;
  bool revert_on_worse = true;
  long long horizon = 10000;      // number of review periods
  std::uint64_t seed = 1;
  Vec initial_alpha;              // empty: pool value closest to 1
  int record_every = 10;
  SolverSettings inner;
};

struct ReplacementPeriod {
  long long period = 0;
  Vec alpha;
  Vec x;
  Vec profit;
};

struct ReplacementResult {
  std::vector<ReplacementPeriod> path;  // thinned by record_every
  std::map<Vec, double> occupancy;      // bias profile -> share of periods
  Vec modal_profile;
  double modal_share = 0.0;
  long long invalid_periods = 0;
  long long replacements = 0;
  long long reverts = 0;
};

ReplacementResult run_replacement(const GameSpec& game, const BiasFunction& f,
                                  const ReplacementConfig& cfg);

}  // namespace naeq
