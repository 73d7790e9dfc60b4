#include <CLI11.hpp>
#include <iostream>

#include "../src/cli/tasks.hpp"

using naeq::cli::ScenarioConfig;
using naeq::cli::TaskOutcome;

namespace {

int dispatch(const std::string& config_path, std::optional<std::uint64_t> seed,
             std::optional<std::string> out_dir, int workers, bool expect_sweep) {
  try {
    ScenarioConfig cfg = ScenarioConfig::load(config_path, seed, out_dir);
    if (expect_sweep && cfg.task != naeq::cli::Task::sweep) {
      std::cerr << "naeq sweep: config task is '" << task_name(cfg.task)
                << "', expected 'sweep'\n";
      return 2;
    }
    naeq::cli::log_info("running task " + task_name(cfg.task));
    TaskOutcome outcome = naeq::cli::run_scenario(cfg, workers);
    for (const auto& w : outcome.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& f : outcome.outputs) std::cout << f << "\n";
    return outcome.exit_code;
  } catch (const naeq::Error& e) {
    std::cerr << "naeq: " << e.what() << "\n";
    switch (e.code()) {
      case naeq::ErrorCode::config_error:
      case naeq::ErrorCode::invalid_argument:
      case naeq::ErrorCode::out_of_domain:
        return 2;
      default:
        return 3;
    }
  } catch (const std::exception& e) {
    std::cerr << "naeq: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"naeq - numerical equilibrium toolkit for demand-sensitivity games"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  bool out_set = false;
  int workers = 1;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("config", config_path, "scenario config (json)")->required();
    cmd->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
      seed_set = true;
    });
    cmd->add_option("--out", out_dir, "output directory")->each([&](const std::string&) {
      out_set = true;
    });
    cmd->add_option("--workers", workers, "concurrent sweep points")
        ->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "execute a scenario");
  add_common(run);
  CLI::App* sweep = app.add_subcommand("sweep", "execute a sweep scenario");
  add_common(sweep);

  CLI11_PARSE(app, argc, argv);

  const auto seed_opt = seed_set ? std::optional<std::uint64_t>(seed) : std::nullopt;
  const auto out_opt = out_set ? std::optional<std::string>(out_dir) : std::nullopt;
  return dispatch(config_path, seed_opt, out_opt, workers, sweep->parsed());
}
