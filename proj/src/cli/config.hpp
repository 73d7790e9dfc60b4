#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "naeq/dynamics.hpp"
#include "naeq/merger.hpp"
#include "naeq/microfound.hpp"

namespace naeq::cli {

using nlohmann::json;

enum class Task {
  solve_alpha_eq,
  solve_nae,
  audit,
  verify,
  merger,
  simulate_microfound,
  simulate_dynamics,
  sweep,
};

Task parse_task(const std::string& name);
std::string task_name(Task t);

// One constructed game plus whatever closed-form handle the kind carries.
struct GameHandle {
  GameSpec game;
  std::optional<LinearPriceMarket> price;
  std::optional<AdvertisingMarket> advertising;
  std::optional<TeamProductionSpec> team;
};

// Declarative scenario: a game block, a task, solver settings, sweep grids.
// Validation happens up front; a ConfigError names the offending field.
struct ScenarioConfig {
  Task task = Task::solve_nae;
  json raw;                    // full document, post seed/output overrides
  std::uint64_t seed = 0;
  bool seed_present = false;
  std::string output_dir = "out";

  static ScenarioConfig load(const std::string& path,
                             std::optional<std::uint64_t> seed_override,
                             std::optional<std::string> out_override);
  static ScenarioConfig from_json(json doc, std::optional<std::uint64_t> seed_override,
                                  std::optional<std::string> out_override);

  GameHandle game() const;
  SolverSettings solver_settings() const;
  NaeSettings nae_settings() const;
  BiasFunction bias_function() const;
};

GameHandle build_game(const json& block);

// Applies a dotted path ("game.c") into a json document.
void apply_path(json& doc, const std::string& dotted, const json& value);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace naeq::cli
