#include "config.hpp"

#include <fstream>

namespace naeq::cli {

namespace {

[[noreturn]] void config_fail(const std::string& field, const std::string& why) {
  raise(ErrorCode::config_error, "field '" + field + "': " + why);
}

double num(const json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_number()) config_fail(field, "number required");
  return j[field].get<double>();
}

double num_or(const json& j, const std::string& field, double fallback) {
  if (!j.contains(field)) return fallback;
  if (!j[field].is_number()) config_fail(field, "number required");
  return j[field].get<double>();
}

long long int_or(const json& j, const std::string& field, long long fallback) {
  if (!j.contains(field)) return fallback;
  if (!j[field].is_number_integer()) config_fail(field, "integer required");
  return j[field].get<long long>();
}

Vec vec_of(const json& j, const std::string& field) {
  if (!j.contains(field) || !j[field].is_array()) config_fail(field, "array required");
  Vec out;
  for (const auto& v : j[field]) {
    if (!v.is_number()) config_fail(field, "numeric array required");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

Task parse_task(const std::string& name) {
  if (name == "solve-alpha-eq") return Task::solve_alpha_eq;
  if (name == "solve-nae") return Task::solve_nae;
  if (name == "audit") return Task::audit;
  if (name == "verify") return Task::verify;
  if (name == "merger") return Task::merger;
  if (name == "simulate-microfound") return Task::simulate_microfound;
  if (name == "simulate-dynamics") return Task::simulate_dynamics;
  if (name == "sweep") return Task::sweep;
  config_fail("task", "unknown task '" + name + "'");
}

std::string task_name(Task t) {
  switch (t) {
    case Task::solve_alpha_eq: return "solve-alpha-eq";
    case Task::solve_nae: return "solve-nae";
    case Task::audit: return "audit";
    case Task::verify: return "verify";
    case Task::merger: return "merger";
    case Task::simulate_microfound: return "simulate-microfound";
    case Task::simulate_dynamics: return "simulate-dynamics";
    case Task::sweep: return "sweep";
  }
  return "?";
}

GameHandle build_game(const json& block) {
  if (!block.is_object() || !block.contains("kind")) config_fail("game.kind", "missing");
  const std::string kind = block["kind"].get<std::string>();
  if (kind == "linear-price") {
    auto m = LinearPriceMarket::weighted(vec_of(block, "a"), vec_of(block, "b"),
                                         vec_of(block, "c"), vec_of(block, "w"));
    return GameHandle{m.game(), m, std::nullopt, std::nullopt};
  }
  if (kind == "linear-price-direct") {
    auto m = LinearPriceMarket::duopoly_direct(vec_of(block, "a"), vec_of(block, "b_tilde"),
                                               vec_of(block, "c_tilde"));
    return GameHandle{m.game(), m, std::nullopt, std::nullopt};
  }
  if (kind == "symmetric-price") {
    auto m = LinearPriceMarket::symmetric(num(block, "a"), num(block, "b"), num(block, "c"),
                                          static_cast<int>(int_or(block, "n", 2)));
    return GameHandle{m.game(), m, std::nullopt, std::nullopt};
  }
  if (kind == "motivating-example") {
    auto m = motivating_example();
    return GameHandle{m.game(), m, std::nullopt, std::nullopt};
  }
  if (kind == "advertising") {
    auto arr2 = [&](const char* f) {
      Vec v = vec_of(block, f);
      if (v.size() != 2) config_fail(std::string("game.") + f, "two entries required");
      return std::array<double, 2>{v[0], v[1]};
    };
    auto m = AdvertisingMarket::make(arr2("a"), arr2("b"), arr2("c"), arr2("p"));
    return GameHandle{m.game(), std::nullopt, m, std::nullopt};
  }
  if (kind == "team-production") {
    auto t = TeamProductionSpec::make(static_cast<int>(int_or(block, "n", 2)),
                                      num_or(block, "theta", 10.0), num_or(block, "gamma", 0.3));
    return GameHandle{t.game(), std::nullopt, std::nullopt, t};
  }
  if (kind == "circle") {
    return GameHandle{circle_game(num_or(block, "epsilon", 0.01)), std::nullopt, std::nullopt,
                      std::nullopt};
  }
  config_fail("game.kind", "unknown kind '" + kind + "'");
}

ScenarioConfig ScenarioConfig::load(const std::string& path,
                                    std::optional<std::uint64_t> seed_override,
                                    std::optional<std::string> out_override) {
  std::ifstream in(path);
  if (!in.good()) config_fail("config", "cannot read " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    config_fail("config", std::string("json parse error: ") + e.what());
  }
  return from_json(std::move(doc), seed_override, out_override);
}

ScenarioConfig ScenarioConfig::from_json(json doc, std::optional<std::uint64_t> seed_override,
                                         std::optional<std::string> out_override) {
  ScenarioConfig cfg;
  if (!doc.is_object()) config_fail("config", "top-level object required");
  if (!doc.contains("task") || !doc["task"].is_string()) config_fail("task", "string required");
  cfg.task = parse_task(doc["task"].get<std::string>());

  if (seed_override) doc["seed"] = *seed_override;
  if (out_override) doc["output"] = *out_override;

  cfg.seed_present = doc.contains("seed");
  if (cfg.seed_present) {
    if (!doc["seed"].is_number_integer()) config_fail("seed", "integer required");
    cfg.seed = doc["seed"].get<std::uint64_t>();
  }
  cfg.output_dir = doc.value("output", std::string("out"));
  cfg.raw = std::move(doc);

  const bool stochastic = cfg.task == Task::simulate_microfound ||
                          cfg.task == Task::simulate_dynamics;
  if (stochastic && !cfg.seed_present) config_fail("seed", "required for stochastic tasks");

  // Validate the pieces the task needs up front, before any solving starts.
  if (cfg.task != Task::merger && cfg.task != Task::simulate_microfound &&
      cfg.task != Task::sweep) {
    if (!cfg.raw.contains("game")) config_fail("game", "missing");
    (void)cfg.game();
  }
  if (cfg.task == Task::sweep) {
    if (!cfg.raw.contains("sweep") || !cfg.raw["sweep"].is_object())
      config_fail("sweep", "object required");
    const json& sw = cfg.raw["sweep"];
    if (!sw.contains("grids") || !sw["grids"].is_object() || sw["grids"].empty())
      config_fail("sweep.grids", "non-empty grid map required");
    if (sw["grids"].size() > 2) config_fail("sweep.grids", "at most two grid parameters");
    for (const auto& [key, values] : sw["grids"].items()) {
      if (!values.is_array() || values.empty())
        config_fail("sweep.grids." + key, "non-empty array required");
    }
    if (!sw.contains("run") || !sw["run"].is_string())
      config_fail("sweep.run", "inner task name required");
    const Task inner = parse_task(sw["run"].get<std::string>());
    if (inner == Task::sweep) config_fail("sweep.run", "sweeps do not nest");
  }
  if (cfg.task == Task::merger || (cfg.task == Task::sweep &&
                                   cfg.raw["sweep"]["run"].get<std::string>() == "merger")) {
    const json& m = cfg.raw.value("merger", json::object());
    if (cfg.task == Task::merger)
      (void)MergerScenario::make(num_or(m, "a", 20.0), num_or(m, "b", 1.0), num_or(m, "c", 0.5));
  }
  return cfg;
}

GameHandle ScenarioConfig::game() const {
  if (!raw.contains("game")) config_fail("game", "missing");
  return build_game(raw["game"]);
}

BiasFunction ScenarioConfig::bias_function() const {
  BiasFunction f;
  if (raw.contains("bias_domain")) {
    const json& b = raw["bias_domain"];
    f.domain_lo = num_or(b, "lo", f.domain_lo);
    f.domain_hi = num_or(b, "hi", f.domain_hi);
    if (!(f.domain_lo > 0.0 && f.domain_lo < 1.0 && f.domain_hi > 1.0))
      config_fail("bias_domain", "need 0 < lo < 1 < hi");
  }
  return f;
}

SolverSettings ScenarioConfig::solver_settings() const {
  SolverSettings s;
  if (!raw.contains("solver")) return s;
  const json& j = raw["solver"];
  s.damping = num_or(j, "damping", s.damping);
  if (!(s.damping > 0.0 && s.damping <= 1.0)) config_fail("solver.damping", "needs (0, 1]");
  s.tolerance = num_or(j, "tolerance", s.tolerance);
  if (!(s.tolerance > 0.0)) config_fail("solver.tolerance", "must be positive");
  s.max_iterations = static_cast<int>(int_or(j, "max_iterations", s.max_iterations));
  s.multistarts = static_cast<int>(int_or(j, "multistarts", s.multistarts));
  if (j.contains("initial")) s.initial = vec_of(j, "initial");
  return s;
}

NaeSettings ScenarioConfig::nae_settings() const {
  NaeSettings s;
  s.inner = solver_settings();
  if (!raw.contains("nae")) return s;
  const json& j = raw["nae"];
  s.alpha_damping = num_or(j, "damping", s.alpha_damping);
  s.alpha_tolerance = num_or(j, "tolerance", s.alpha_tolerance);
  s.max_outer = static_cast<int>(int_or(j, "max_outer", s.max_outer));
  if (j.contains("initial_alpha")) s.initial_alpha = vec_of(j, "initial_alpha");
  s.run_verify = j.value("verify", s.run_verify);
  s.run_audit = j.value("audit", s.run_audit);
  s.allow_failed_audit = j.value("allow_failed_audit", s.allow_failed_audit);
  s.verify.grid_points = static_cast<int>(int_or(j, "verify_grid", s.verify.grid_points));
  s.verify.grid_lo = num_or(j, "verify_lo", s.verify.grid_lo);
  s.verify.grid_hi = num_or(j, "verify_hi", s.verify.grid_hi);
  if (!(s.verify.grid_lo > 0.0 && s.verify.grid_lo < s.verify.grid_hi))
    config_fail("nae.verify_lo", "need 0 < lo < hi");
  return s;
}

void apply_path(json& doc, const std::string& dotted, const json& value) {
  json* cur = &doc;
  size_t start = 0;
  while (true) {
    const size_t dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace naeq::cli
