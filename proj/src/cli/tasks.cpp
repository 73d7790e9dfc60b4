#include "tasks.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <thread>

#include "naeq/rng.hpp"
#include "naeq/version.hpp"

namespace naeq::cli {

namespace fs = std::filesystem;

int log_level() {
  const char* env = std::getenv("NAEQ_LOG");
  if (!env) return 0;
  const std::string v(env);
  if (v == "debug" || v == "2") return 2;
  if (v == "info" || v == "1") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[naeq] " << msg << "\n";
}

namespace {

std::string S(double v) { return CsvWriter::fmt(v); }

json vec_json(const Vec& v) { return json(v); }

json audit_json(const AuditReport& a) {
  json j;
  j["sign_comp"] = a.sign_comp;
  j["sign_extr"] = a.sign_extr;
  j["sign_partial"] = a.sign_partial;
  j["samples"] = a.samples;
  j["evaluation_failures"] = a.evaluation_failures;
  for (const auto& [id, res] : a.passed) j["passed"][id] = to_string(res);
  for (const auto& [id, m] : a.margins)
    if (std::isfinite(m)) j["margins"][id] = m;
  j["witnesses"] = json::array();
  for (const auto& w : a.witnesses) {
    json wj;
    wj["assumption"] = w.assumption;
    wj["x"] = vec_json(w.x);
    wj["alpha"] = vec_json(w.alpha);
    wj["i"] = w.i;
    wj["j"] = w.j;
    wj["value_a"] = w.value_a;
    wj["value_b"] = w.value_b;
    wj["note"] = w.note;
    j["witnesses"].push_back(std::move(wj));
  }
  return j;
}

json classification_json(const DirectionClassification& c) {
  json j;
  j["signs"] = {{"comp", c.sign_comp}, {"extr", c.sign_extr}, {"partial", c.sign_partial}};
  j["predicted"] = {{"br", c.predicted_br}, {"alpha", c.predicted_alpha},
                    {"pareto", c.predicted_pareto}};
  j["observed"] = {{"br", c.observed_br}, {"alpha", c.observed_alpha},
                   {"pareto", c.observed_pareto}};
  j["matches"] = {{"br", c.br_matches}, {"alpha", c.alpha_matches},
                  {"pareto", c.pareto_matches}};
  j["symmetric_pair"] = c.symmetric_pair;
  j["bias_rule_note"] =
      "overestimation predicted iff comp * extr * partial < 0, the convention "
      "all four application classes satisfy";
  return j;
}

json nae_json(const NaeReport& r) {
  json j;
  j["alpha_star"] = vec_json(r.alpha_star);
  j["x_star"] = vec_json(r.x_star);
  j["q_star"] = vec_json(r.q_star);
  j["profits"] = vec_json(r.profits);
  j["x_nash"] = vec_json(r.x_nash);
  j["nash_profits"] = vec_json(r.nash_profits);
  j["br_unbiased_at_star"] = vec_json(r.br_unbiased_at_star);
  j["characterization_residual"] = vec_json(r.characterization_residual);
  j["characterization_rel"] = vec_json(r.characterization_rel);
  j["stackelberg_gaps"] = vec_json(r.stackelberg_gaps);
  j["converged"] = r.converged;
  j["outer_iterations"] = r.outer_iterations;
  j["verified"] = r.verified;
  j["verify"] = {{"worst_violation", r.verify.worst_violation},
                 {"worst_player", r.verify.worst_player},
                 {"worst_alpha", r.verify.worst_alpha},
                 {"inconclusive", r.verify.inconclusive}};
  if (r.classification) j["classification"] = classification_json(*r.classification);
  if (r.audit) j["audit"] = audit_json(*r.audit);
  j["warnings"] = r.warnings;
  if (!r.converged && !r.alpha_trajectory.empty()) {
    j["alpha_trajectory"] = json::array();
    for (const auto& a : r.alpha_trajectory) j["alpha_trajectory"].push_back(vec_json(a));
  }
  if (!r.extra_fixed_points.empty()) {
    j["extra_fixed_points"] = json::array();
    for (const auto& fp : r.extra_fixed_points) j["extra_fixed_points"].push_back(vec_json(fp));
  }
  return j;
}

double vmin(const Vec& v) { return *std::min_element(v.begin(), v.end()); }
double vmax(const Vec& v) { return *std::max_element(v.begin(), v.end()); }

struct SingleRun {
  FlatRow row;                       // sweep-stable scalar summary
  std::vector<std::pair<std::string, CsvWriter>> files;  // name -> csv
  std::vector<std::pair<std::string, json>> reports;     // name -> json
  std::vector<std::string> warnings;
  int exit_code = 0;
};

SingleRun do_solve_alpha_eq(const ScenarioConfig& cfg) {
  SingleRun out;
  GameHandle h = cfg.game();
  BiasFunction f = cfg.bias_function();
  SolverSettings s = cfg.solver_settings();
  const int n = h.game.players();

  std::vector<Vec> grid;
  if (cfg.raw.contains("alpha_grid")) {
    for (const auto& row : cfg.raw["alpha_grid"]) grid.push_back(row.get<Vec>());
  } else if (cfg.raw.contains("alpha")) {
    grid.push_back(cfg.raw["alpha"].get<Vec>());
  } else {
    grid.push_back(Vec(n, 1.0));
  }

  std::vector<std::string> header;
  for (int i = 0; i < n; ++i) header.push_back("alpha_" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) header.push_back("x_" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) header.push_back("q_" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) header.push_back("pi_" + std::to_string(i + 1));
  header.insert(header.end(), {"residual", "iterations", "status"});
  CsvWriter csv(header);

  SolveReport last;
  Vec last_alpha;
  for (const Vec& alpha : grid) {
    require(static_cast<int>(alpha.size()) == n, ErrorCode::config_error,
            "alpha entry length mismatch");
    SolveReport rep = solve_alpha_equilibrium(h.game, f, BiasProfile{alpha}, s);
    if (!rep.converged()) out.exit_code = 3;
    ProfileEval ev = evaluate(h.game, rep.x);
    std::vector<std::string> row;
    for (double a : alpha) row.push_back(S(a));
    for (double v : ev.x) row.push_back(S(v));
    for (double v : ev.q) row.push_back(S(v));
    for (double v : ev.pi) row.push_back(S(v));
    row.push_back(S(rep.residual));
    row.push_back(CsvWriter::fmt(rep.iterations));
    row.push_back(to_string(rep.status));
    csv.add_row(std::move(row));
    last = rep;
    last_alpha = alpha;
  }
  out.files.emplace_back("alpha_eq.csv", std::move(csv));

  ProfileEval ev = evaluate(h.game, last.x);
  out.row.header = {"alpha_1", "x_1", "q_1", "pi_1", "x_min", "x_max", "residual", "status"};
  out.row.cells = {S(last_alpha[0]), S(ev.x[0]),      S(ev.q[0]),
                   S(ev.pi[0]),      S(vmin(ev.x)),   S(vmax(ev.x)),
                   S(last.residual), to_string(last.status)};
  return out;
}

SingleRun do_solve_nae(const ScenarioConfig& cfg) {
  SingleRun out;
  GameHandle h = cfg.game();
  BiasFunction f = cfg.bias_function();
  NaeSettings s = cfg.nae_settings();
  if (h.team) {
    // Anchor the unbiased reference on the lowest Nash equilibrium.
    Vec lne = h.team->lowest_nash();
    s.nash_initial = lne;
    if (s.inner.initial.empty()) s.inner.initial = lne;
  }
  NaeReport rep = solve_nae(h.game, f, s);
  if (!rep.converged) out.exit_code = 3;
  out.warnings = rep.warnings;


  const int n = h.game.players();
  CsvWriter csv({"player", "alpha_star", "x_star", "q_star", "pi_star", "x_nash", "pi_nash",
                 "br_unbiased", "characterization_rel", "stackelberg_gap"});
  for (int i = 0; i < n; ++i) {
    csv.add_row({CsvWriter::fmt(i + 1), S(rep.alpha_star[i]), S(rep.x_star[i]), S(rep.q_star[i]),
                 S(rep.profits[i]), S(rep.x_nash[i]), S(rep.nash_profits[i]),
                 S(rep.br_unbiased_at_star[i]), S(rep.characterization_rel[i]),
                 S(rep.stackelberg_gaps.empty() ? 0.0 : rep.stackelberg_gaps[i])});
  }
  out.files.emplace_back("nae.csv", std::move(csv));
  json report = nae_json(rep);
  report["bias_domain"] = {{"lo", f.domain_lo}, {"hi", f.domain_hi}};
  out.reports.emplace_back("nae_report.json", std::move(report));

  out.row.header = {"converged",     "verified",    "alpha_star_1", "alpha_star_min",
                    "alpha_star_max", "x_star_1",   "x_ne_1",       "pi_1",
                    "pi_ne_1",        "worst_violation", "characterization_rel_max", "outer_iterations"};
  out.row.cells = {CsvWriter::fmt(rep.converged),
                   CsvWriter::fmt(rep.verified),
                   S(rep.alpha_star[0]),
                   S(vmin(rep.alpha_star)),
                   S(vmax(rep.alpha_star)),
                   S(rep.x_star[0]),
                   S(rep.x_nash[0]),
                   S(rep.profits[0]),
                   S(rep.nash_profits[0]),
                   S(rep.verify.worst_violation),
                   S(vmax(rep.characterization_rel)),
                   CsvWriter::fmt(rep.outer_iterations)};
  return out;
}

SingleRun do_audit(const ScenarioConfig& cfg) {
  SingleRun out;
  GameHandle h = cfg.game();
  BiasFunction f = cfg.bias_function();
  SamplingPlan plan = default_plan(h.game, f);
  if (cfg.raw.contains("audit")) {
    const json& a = cfg.raw["audit"];
    plan.grid_per_dim = a.value("grid_per_dim", plan.grid_per_dim);
    plan.random_points = a.value("random_points", plan.random_points);
    plan.seed = a.value("seed", plan.seed);
    plan.deviation_scale = a.value("deviation_scale", plan.deviation_scale);
    if (a.contains("box_lo") && a.contains("box_hi")) {
      Vec lo = a["box_lo"].get<Vec>(), hi = a["box_hi"].get<Vec>();
      for (int i = 0; i < h.game.players(); ++i) plan.box[i] = Interval{lo[i], hi[i]};
    }
  }
  AuditReport rep = audit_assumptions(h.game, f, plan);
  for (const auto& [id, result] : rep.passed)
    if (result == CheckResult::heuristic_pass)
      out.warnings.push_back(id + ": numeric bracketing only (heuristic pass)");

  CsvWriter csv({"sign_comp", "sign_extr", "sign_partial", "A1", "A2", "A3", "A4", "A5", "A6",
                 "samples", "failures"});
  csv.add_row({CsvWriter::fmt(rep.sign_comp), CsvWriter::fmt(rep.sign_extr),
               CsvWriter::fmt(rep.sign_partial), to_string(rep.passed.at("A1")),
               to_string(rep.passed.at("A2")), to_string(rep.passed.at("A3")),
               to_string(rep.passed.at("A4")), to_string(rep.passed.at("A5")),
               to_string(rep.passed.at("A6")), CsvWriter::fmt(rep.samples),
               CsvWriter::fmt(rep.evaluation_failures)});
  out.row.header = csv.header();
  out.row.cells = csv.rows()[0];
  out.files.emplace_back("audit.csv", std::move(csv));
  out.reports.emplace_back("audit.json", audit_json(rep));
  return out;
}

SingleRun do_verify(const ScenarioConfig& cfg) {
  SingleRun out;
  GameHandle h = cfg.game();
  BiasFunction f = cfg.bias_function();
  require(cfg.raw.contains("alpha"), ErrorCode::config_error, "verify task needs 'alpha'");
  Vec alpha = cfg.raw["alpha"].get<Vec>();
  SolverSettings s = cfg.solver_settings();
  SolveReport eq = solve_alpha_equilibrium(h.game, f, BiasProfile{alpha}, s);
  require_converged(eq);

  NaeSettings ns = cfg.nae_settings();
  VerifySettings vs = ns.verify;
  vs.inner = s;
  VerifyResult res = verify_nae(h.game, f, BiasProfile{alpha}, eq.x, vs);

  const Vec base = h.game.profits(eq.x);
  CsvWriter csv({"player", "alpha_dev", "payoff", "improvement", "status"});
  // Re-run the grid for the row dump (cheap relative to clarity).
  for (int i = 0; i < h.game.players(); ++i) {
    for (int k = 0; k < vs.grid_points; ++k) {
      const double t = vs.grid_points == 1 ? 0.0 : static_cast<double>(k) / (vs.grid_points - 1);
      const double a_dev =
          std::exp(std::log(vs.grid_lo) + t * (std::log(vs.grid_hi) - std::log(vs.grid_lo)));
      BiasProfile dev{alpha};
      dev.alpha[i] = a_dev;
      SolverSettings inner = s;
      inner.initial = eq.x;
      std::string status = "converged";
      double payoff = 0.0, improvement = 0.0;
      try {
        SolveReport de = solve_alpha_equilibrium(h.game, f, dev, inner);
        if (!de.converged()) {
          status = "inconclusive";
        } else {
          payoff = h.game.profit(i, de.x);
          improvement = payoff - base[i];
        }
      } catch (const Error& e) {
        status = std::string("error:") + error_code_name(e.code());
      }
      csv.add_row({CsvWriter::fmt(i + 1), S(a_dev), S(payoff), S(improvement), status});
    }
  }
  out.files.emplace_back("verify.csv", std::move(csv));
  json vj;
  vj["ok"] = res.ok;
  vj["worst_violation"] = res.worst_violation;
  vj["worst_player"] = res.worst_player;
  vj["worst_alpha"] = res.worst_alpha;
  vj["inconclusive"] = res.inconclusive;
  out.reports.emplace_back("verify.json", std::move(vj));

  out.row.header = {"verified", "worst_violation", "worst_player", "worst_alpha", "inconclusive"};
  out.row.cells = {CsvWriter::fmt(res.ok), S(res.worst_violation),
                   CsvWriter::fmt(res.worst_player), S(res.worst_alpha),
                   CsvWriter::fmt(res.inconclusive)};
  return out;
}

SingleRun do_merger(const ScenarioConfig& cfg) {
  SingleRun out;
  const json m = cfg.raw.value("merger", json::object());
  MergerScenario s = MergerScenario::make(m.value("a", 20.0), m.value("b", 1.0),
                                          m.value("c", 0.5));
  s = postmerger_outcomes(s);

  CsvWriter csv({"c", "mc", "alpha_pre", "alpha_post", "x_pre", "x_ne_pre", "x1_mc", "x1_short",
                 "x1_long", "x23_mc", "x23_short", "x23_long", "ordering_ok"});
  csv.add_row({S(s.c), S(s.mc), S(s.alpha_pre), S(s.alpha_post), S(s.x_pre), S(s.x_ne_pre),
               S(s.x1_mc), S(s.x1_short), S(s.x1_long), S(s.x23_mc), S(s.x23_short),
               S(s.x23_long), CsvWriter::fmt(s.ordering_ok)});
  out.row.header = csv.header();
  out.row.cells = csv.rows()[0];
  out.files.emplace_back("merger.csv", std::move(csv));
  return out;
}

SingleRun do_microfound(const ScenarioConfig& cfg) {
  SingleRun out;
  require(cfg.raw.contains("microfound"), ErrorCode::config_error,
          "simulate-microfound needs a 'microfound' block");
  const json& m = cfg.raw["microfound"];
  const std::string experiment = m.value("experiment", std::string("discount"));
  const std::string mode = m.value("mode", std::string("both"));
  const long long reps = m.value("replications", 1);
  require(reps >= 1, ErrorCode::config_error, "replications must be positive");

  if (experiment == "shock") {
    ShockDiscountSpec s{m.value("discount", 1.0), m.value("shock", 0.0)};
    const double alpha = shock_discount_alpha(s);
    CsvWriter csv({"discount", "shock", "implied_alpha"});
    csv.add_row({S(s.discount), S(s.shock), S(alpha)});
    out.row.header = csv.header();
    out.row.cells = csv.rows()[0];
    out.files.emplace_back("microfound.csv", std::move(csv));
    return out;
  }

  if (experiment == "discount") {
    DiscountExperiment e;
    e.a = m.value("a", e.a);
    e.b = m.value("b", e.b);
    e.c = m.value("c", e.c);
    e.p_lo = m.value("p_lo", e.p_lo);
    e.p_hi = m.value("p_hi", e.p_hi);
    e.mu_lo = m.value("mu_lo", e.mu_lo);
    e.gamma1 = m.value("gamma1", e.gamma1);
    e.gamma2 = m.value("gamma2", e.gamma2);
    e.rho = m.value("rho", e.rho);
    e.sample_size = m.value("sample_size", e.sample_size);
    e.validate();

    CsvWriter csv({"replication", "mode", "seed", "eta_hat", "std_error", "eta_true_consistent",
                   "eta_true_variant", "implied_alpha", "n_lo", "n_hi"});
    DiscountResult analytic = discount_elasticity(e, SimMode::analytic);
    if (mode != "monte-carlo")
      csv.add_row({"0", "analytic", "0", S(analytic.eta_hat), "0", S(analytic.eta_true_consistent),
                   S(analytic.eta_true_variant), S(analytic.implied_alpha), "0", "0"});
    double mean = 0.0, se2 = 0.0, alpha_mean = 0.0;
    int done = 0;
    if (mode != "analytic") {
      for (long long r = 0; r < reps; ++r) {
        e.seed = cfg.seed + static_cast<std::uint64_t>(r);
        DiscountResult mc = discount_elasticity(e, SimMode::monte_carlo);
        csv.add_row({CsvWriter::fmt(r + 1), "monte-carlo", CsvWriter::fmt((long long)e.seed),
                     S(mc.eta_hat), S(mc.std_error), S(mc.eta_true_consistent),
                     S(mc.eta_true_variant), S(mc.implied_alpha), CsvWriter::fmt(mc.n_lo),
                     CsvWriter::fmt(mc.n_hi)});
        mean += mc.eta_hat;
        se2 += mc.std_error * mc.std_error;
        alpha_mean += mc.implied_alpha;
        ++done;
      }
      mean /= std::max(1, done);
      alpha_mean /= std::max(1, done);
      const double se = std::sqrt(se2) / std::max(1, done);  // pooled over replications
      csv.add_row({"summary", "monte-carlo", CsvWriter::fmt((long long)cfg.seed), S(mean), S(se),
                   S(analytic.eta_true_consistent), S(analytic.eta_true_variant), S(alpha_mean),
                   "0", "0"});
      analytic.std_error = se;
    }
    out.row.header = {"eta_hat_analytic", "eta_hat_mc", "implied_alpha", "mc_std_error"};
    out.row.cells = {S(analytic.eta_hat), S(done ? mean : 0.0), S(analytic.implied_alpha),
                     S(done ? analytic.std_error : 0.0)};
    out.files.emplace_back("microfound.csv", std::move(csv));
    return out;
  }

  if (experiment == "ad-targeting") {
    AdTargetingExperiment e;
    e.mean_sales = m.value("mean_sales", e.mean_sales);
    e.x_lo = m.value("x_lo", e.x_lo);
    e.x_hi = m.value("x_hi", e.x_hi);
    e.horizon = m.value("horizon", e.horizon);
    e.validate();

    CsvWriter csv({"replication", "mode", "seed", "estimate", "std_error", "up_branch",
                   "down_branch", "closed_form_estimate", "exact_estimate", "up_count", "down_count"});
    AdTargetingResult analytic = ad_targeting_bias(e, SimMode::analytic);
    if (mode != "monte-carlo")
      csv.add_row({"0", "analytic", "0", S(analytic.estimate), "0", S(analytic.up_branch),
                   S(analytic.down_branch), S(analytic.closed_form_estimate), S(analytic.exact_estimate),
                   "0", "0"});
    double mean = 0.0, se2 = 0.0, up_mean = 0.0, dn_mean = 0.0;
    int done = 0;
    if (mode != "analytic") {
      for (long long r = 0; r < reps; ++r) {
        e.seed = cfg.seed + static_cast<std::uint64_t>(r);
        AdTargetingResult mc = ad_targeting_bias(e, SimMode::monte_carlo);
        csv.add_row({CsvWriter::fmt(r + 1), "monte-carlo", CsvWriter::fmt((long long)e.seed),
                     S(mc.estimate), S(mc.std_error), S(mc.up_branch), S(mc.down_branch),
                     S(mc.closed_form_estimate), S(mc.exact_estimate), CsvWriter::fmt(mc.up_count),
                     CsvWriter::fmt(mc.down_count)});
        mean += mc.estimate;
        se2 += mc.std_error * mc.std_error;
        up_mean += mc.up_branch;
        dn_mean += mc.down_branch;
        ++done;
      }
      mean /= std::max(1, done);
      const double se = std::sqrt(se2) / std::max(1, done);
      csv.add_row({"summary", "monte-carlo", CsvWriter::fmt((long long)cfg.seed), S(mean), S(se),
                   S(up_mean / std::max(1, done)), S(dn_mean / std::max(1, done)),
                   S(analytic.closed_form_estimate), S(analytic.exact_estimate), "0", "0"});
      analytic.std_error = se;
    }
    out.warnings.push_back("ad-targeting: " + analytic.note);
    out.row.header = {"estimate_analytic", "estimate_exact", "estimate_mc", "mc_std_error"};
    out.row.cells = {S(analytic.closed_form_estimate), S(analytic.exact_estimate),
                     S(done ? mean : 0.0), S(done ? analytic.std_error : 0.0)};
    out.files.emplace_back("microfound.csv", std::move(csv));
    return out;
  }
  raise(ErrorCode::config_error, "unknown experiment '" + experiment + "'");
}

SingleRun do_dynamics(const ScenarioConfig& cfg) {
  SingleRun out;
  require(cfg.raw.contains("dynamics"), ErrorCode::config_error,
          "simulate-dynamics needs a 'dynamics' block");
  const json& d = cfg.raw["dynamics"];
  GameHandle h = cfg.game();
  BiasFunction f = cfg.bias_function();
  const std::string process = d.value("process", std::string("adjustment"));
  const int n = h.game.players();

  if (process == "adjustment") {
    AdjustmentConfig ac;
    ac.step = d.value("step", ac.step);
    ac.max_steps = d.value("max_steps", ac.max_steps);
    ac.tolerance = d.value("tolerance", ac.tolerance);
    ac.record_every = d.value("record_every", ac.record_every);
    if (d.contains("initial")) ac.initial = d["initial"].get<Vec>();
    const std::string rule = d.value("rule", std::string("perceived-gradient"));
    ac.rule = rule == "elasticity-threshold" ? UpdateRule::elasticity_threshold
                                             : UpdateRule::perceived_gradient;
    Vec alpha = d.contains("alpha") ? d["alpha"].get<Vec>() : Vec(n, 1.0);
    Trajectory tr = run_adjustment(h.game, f, BiasProfile{alpha}, ac);
    if (tr.diverged) out.exit_code = 3;

    CsvWriter csv({"step", "firm", "x"});
    for (size_t k = 0; k < tr.path.size(); ++k)
      for (int i = 0; i < n; ++i)
        csv.add_row({CsvWriter::fmt((long long)(k * ac.record_every)), CsvWriter::fmt(i + 1),
                     S(tr.path[k][i])});
    out.files.emplace_back("trajectory.csv", std::move(csv));
    json jr;
    jr["converged"] = tr.converged;
    jr["diverged"] = tr.diverged;
    jr["steps"] = tr.steps;
    jr["final_distance"] = tr.final_distance;
    jr["fixed_point"] = vec_json(tr.fixed_point);
    out.reports.emplace_back("dynamics.json", std::move(jr));
    out.row.header = {"converged", "diverged", "steps", "final_distance", "fixed_point_1"};
    out.row.cells = {CsvWriter::fmt(tr.converged), CsvWriter::fmt(tr.diverged),
                     CsvWriter::fmt(tr.steps), S(tr.final_distance), S(tr.fixed_point[0])};
    return out;
  }

  if (process == "replacement") {
    ReplacementConfig rc;
    if (d.contains("pool")) rc.pool = d["pool"].get<Vec>();
    rc.mutation_scale = d.value("mutation_scale", rc.mutation_scale);
    rc.review_period = d.value("review_period", rc.review_period);
    rc.p_max = d.value("p_max", rc.p_max);
    rc.logistic_scale = d.value("logistic_scale", rc.logistic_scale);
    rc.trailing_window = d.value("trailing_window", rc.trailing_window);
    rc.revert_on_worse = d.value("revert_on_worse", rc.revert_on_worse);
    rc.horizon = d.value("horizon", rc.horizon);
    rc.record_every = d.value("record_every", rc.record_every);
    if (d.contains("initial_alpha")) rc.initial_alpha = d["initial_alpha"].get<Vec>();
    const long long reps = d.value("replications", 1);

    CsvWriter path_csv({"replication", "period", "firm", "alpha", "x", "profit"});
    CsvWriter occ_csv({"replication", "profile", "share"});
    json jr;
    jr["replications"] = json::array();
    double modal_share_sum = 0.0;
    Vec first_modal;
    for (long long r = 0; r < reps; ++r) {
      rc.seed = cfg.seed + static_cast<std::uint64_t>(r);
      ReplacementResult res = run_replacement(h.game, f, rc);
      for (const auto& p : res.path)
        for (int i = 0; i < n; ++i)
          path_csv.add_row({CsvWriter::fmt(r + 1), CsvWriter::fmt(p.period),
                            CsvWriter::fmt(i + 1), S(p.alpha[i]), S(p.x[i]), S(p.profit[i])});
      for (const auto& [profile, share] : res.occupancy) {
        std::string key;
        for (size_t i = 0; i < profile.size(); ++i)
          key += (i ? "|" : "") + CsvWriter::fmt(profile[i]);
        occ_csv.add_row({CsvWriter::fmt(r + 1), key, S(share)});
      }
      json rj;
      rj["seed"] = rc.seed;
      rj["modal_profile"] = vec_json(res.modal_profile);
      rj["modal_share"] = res.modal_share;
      rj["invalid_periods"] = res.invalid_periods;
      rj["replacements"] = res.replacements;
      rj["reverts"] = res.reverts;
      jr["replications"].push_back(std::move(rj));
      modal_share_sum += res.modal_share;
      if (r == 0) first_modal = res.modal_profile;
    }
    out.files.emplace_back("replacement.csv", std::move(path_csv));
    out.files.emplace_back("occupancy.csv", std::move(occ_csv));
    out.reports.emplace_back("dynamics.json", std::move(jr));
    out.row.header = {"modal_alpha_1", "modal_share_mean", "replications"};
    out.row.cells = {S(first_modal.empty() ? 0.0 : first_modal[0]),
                     S(modal_share_sum / std::max<long long>(1, reps)), CsvWriter::fmt(reps)};
    return out;
  }
  raise(ErrorCode::config_error, "unknown dynamics process '" + process + "'");
}

SingleRun run_single(const ScenarioConfig& cfg) {
  switch (cfg.task) {
    case Task::solve_alpha_eq: return do_solve_alpha_eq(cfg);
    case Task::solve_nae: return do_solve_nae(cfg);
    case Task::audit: return do_audit(cfg);
    case Task::verify: return do_verify(cfg);
    case Task::merger: return do_merger(cfg);
    case Task::simulate_microfound: return do_microfound(cfg);
    case Task::simulate_dynamics: return do_dynamics(cfg);
    case Task::sweep: break;
  }
  raise(ErrorCode::config_error, "sweep cannot run as a single task");
}

std::string iso_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

}  // namespace

TaskOutcome run_scenario(const ScenarioConfig& cfg, int workers) {
  TaskOutcome outcome;
  const std::string started = iso_now();
  fs::create_directories(cfg.output_dir);

  auto emit = [&](const std::string& name, const CsvWriter& csv) {
    const std::string path = (fs::path(cfg.output_dir) / name).string();
    csv.write(path);
    outcome.outputs.push_back(path);
  };
  auto emit_json = [&](const std::string& name, const json& j) {
    const std::string path = (fs::path(cfg.output_dir) / name).string();
    std::ofstream os(path, std::ios::binary);
    os << j.dump(2) << "\n";
    outcome.outputs.push_back(path);
  };

  if (cfg.task != Task::sweep) {
    SingleRun run = run_single(cfg);
    outcome.exit_code = run.exit_code;
    outcome.warnings = run.warnings;
    for (auto& [name, csv] : run.files) emit(name, csv);
    for (auto& [name, j] : run.reports) emit_json(name, j);
  } else {
    const json& sw = cfg.raw["sweep"];
    std::vector<std::string> grid_names;
    std::vector<json> grid_values;
    for (const auto& [key, values] : sw["grids"].items()) {
      grid_names.push_back(key);
      grid_values.push_back(values);
    }
    const size_t n0 = grid_values[0].size();
    const size_t n1 = grid_values.size() > 1 ? grid_values[1].size() : 1;
    const size_t total = n0 * n1;

    struct PointResult {
      std::optional<FlatRow> row;
      std::vector<std::string> grid_cells;
      std::string status = "ok";
    };
    std::vector<PointResult> results(total);

    auto run_point = [&](size_t idx) {
      const size_t i0 = idx / n1;
      const size_t i1 = idx % n1;
      json doc = cfg.raw;
      doc["task"] = sw["run"];
      apply_path(doc, grid_names[0], grid_values[0][i0]);
      PointResult pr;
      pr.grid_cells.push_back(grid_values[0][i0].is_number()
                                  ? S(grid_values[0][i0].get<double>())
                                  : grid_values[0][i0].dump());
      if (grid_values.size() > 1) {
        apply_path(doc, grid_names[1], grid_values[1][i1]);
        pr.grid_cells.push_back(grid_values[1][i1].is_number()
                                    ? S(grid_values[1][i1].get<double>())
                                    : grid_values[1][i1].dump());
      }
      try {
        ScenarioConfig point = ScenarioConfig::from_json(doc, std::nullopt, cfg.output_dir);
        SingleRun run = run_single(point);
        pr.row = run.row;
        if (run.exit_code != 0) pr.status = "non-convergence";
      } catch (const Error& e) {
        pr.status = std::string("error:") + error_code_name(e.code());
      }
      results[idx] = std::move(pr);
    };

    const int k = std::max(1, workers);
    if (k == 1) {
      for (size_t idx = 0; idx < total; ++idx) run_point(idx);
    } else {
      std::atomic<size_t> next{0};
      std::vector<std::thread> pool;
      for (int w = 0; w < k; ++w)
        pool.emplace_back([&] {
          for (size_t idx = next.fetch_add(1); idx < total; idx = next.fetch_add(1))
            run_point(idx);
        });
      for (auto& th : pool) th.join();
    }

    // Header from the first successful point; rows ordered by grid index.
    std::vector<std::string> inner_header;
    for (const auto& pr : results)
      if (pr.row) {
        inner_header = pr.row->header;
        break;
      }
    std::vector<std::string> grid_cols;
    for (const auto& name : grid_names) {
      const size_t dot = name.rfind('.');
      grid_cols.push_back(dot == std::string::npos ? name : name.substr(dot + 1));
    }
    std::vector<std::string> header = grid_cols;
    header.insert(header.end(), inner_header.begin(), inner_header.end());
    header.push_back("status");
    CsvWriter csv(header);
    bool any_failed = false;
    for (const auto& pr : results) {
      std::vector<std::string> row = pr.grid_cells;
      if (pr.row) {
        row.insert(row.end(), pr.row->cells.begin(), pr.row->cells.end());
      } else {
        row.insert(row.end(), inner_header.size(), "");
        any_failed = true;
      }
      row.push_back(pr.status);
      if (pr.status != "ok" && pr.status != "non-convergence") any_failed = true;
      csv.add_row(std::move(row));
    }
    emit("sweep.csv", csv);
    if (sw.contains("outputs")) {
      for (const auto& [fname, cols] : sw["outputs"].items()) {
        std::vector<std::string> selected = cols.get<std::vector<std::string>>();
        emit(fname + ".csv", csv.select(selected));
      }
    }
    if (any_failed) outcome.warnings.push_back("one or more sweep points failed; see status column");
  }

  // Manifest last so the file list is complete.
  json manifest;
  manifest["toolkit"] = "naeq";
  manifest["version"] = kVersion;
  manifest["rng_algorithm"] = kRngAlgorithm;
  manifest["task"] = task_name(cfg.task);
  manifest["config_hash_fnv1a64"] = fnv1a64(cfg.raw.dump());
  manifest["started"] = started;
  manifest["finished"] = iso_now();
  manifest["outputs"] = outcome.outputs;
  manifest["warnings"] = outcome.warnings;
  if (cfg.seed_present) manifest["seed"] = cfg.seed;
  emit_json("run_manifest.json", manifest);
  return outcome;
}

}  // namespace naeq::cli
