#include "ssr/scenario.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ssr/audit.hpp"
#include "ssr/conditional_power.hpp"
#include "ssr/csv.hpp"

namespace ssr {

namespace {
using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
  throw std::invalid_argument("config: field '" + path + "' " + why);
}

double get_num(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) bad_field(ctx + key, "is required");
  if (!j[key].is_number()) bad_field(ctx + key, "must be a number");
  return j[key].get<double>();
}

double get_num_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  return j[key].get<double>();
}

DesignParams parse_design(const json& j) {
  if (!j.contains("design")) bad_field("design", "is required");
  const json& d = j["design"];
  const std::string ctx = "design.";
  double sigma = get_num(d, "sigma", ctx);
  double theta = get_num(d, "theta_alt", ctx);
  double n1 = get_num(d, "n1", ctx);
  double n_min = get_num(d, "n_min", ctx);
  double n_max = get_num(d, "n_max", ctx);
  double alpha = get_num(d, "alpha", ctx);
  if (d.contains("weights")) {
    const json& w = d["weights"];
    if (!w.is_array() || w.size() != 2) bad_field("design.weights", "must be [w1, w2]");
    return DesignParams(sigma, theta, n1, n_min, n_max, alpha, w[0].get<double>(),
                        w[1].get<double>());
  }
  return DesignParams(sigma, theta, n1, n_min, n_max, alpha);
}

RuleSpec parse_rule(const json& r, const std::string& ctx) {
  if (!r.contains("family")) bad_field(ctx + "family", "is required");
  std::string family = r["family"].get<std::string>();
  if (family == "jt") return RuleSpec::jt(get_num(r, "gamma", ctx));
  if (family == "lr")
    return RuleSpec::lr(get_num(r, "lambda1", ctx), get_num(r, "lambda2", ctx));
  if (family == "roi")
    return RuleSpec::roi(get_num(r, "cost_per_participant", ctx),
                         get_num(r, "success_value", ctx),
                         get_num(r, "prior_null", ctx), get_num(r, "prior_alt", ctx));
  if (family == "cpz")
    return RuleSpec::cpz(CpzParams{get_num(r, "n_lo", ctx), get_num(r, "n_hi", ctx),
                                   get_num(r, "cp_floor", ctx),
                                   get_num(r, "cp_ceiling", ctx)});
  if (family == "tabulated") {
    if (!r.contains("csv")) bad_field(ctx + "csv", "is required for tabulated costs");
    return RuleSpec::from_cost(
        CostSpec{tabulated_from_csv_file(r["csv"].get<std::string>())});
  }
  bad_field(ctx + "family", "must be one of jt|lr|roi|cpz|tabulated");
}

json design_json(const DesignParams& d) {
  return json{{"sigma", d.sigma}, {"theta_alt", d.theta_alt}, {"n1", d.n1},
              {"n_min", d.n_min}, {"n_max", d.n_max},         {"alpha", d.alpha},
              {"w1", d.w1},       {"w2", d.w2},               {"delta", d.delta},
              {"c_crit", d.c_crit}};
}

json rule_json(const NamedRule& r) {
  return json{{"name", r.name}, {"family", r.spec.family()}, {"params", r.spec.params_text()}};
}

json oc_json(const OperatingChars& oc) {
  return json{{"power", oc.power},
              {"e_n_null", oc.e_n_null},
              {"e_n_alt", oc.e_n_alt},
              {"type1", oc.type1},
              {"method", oc.method == OcMethod::quadrature ? "quadrature" : "monte_carlo"},
              {"error_bound", oc.error_bound}};
}

json batch_json(const BatchStats& b) {
  return json{{"reps", b.n_reps},          {"seed", b.seed},
              {"theta_true", b.theta_true}, {"reject_rate", b.reject_rate},
              {"reject_se", b.reject_se},   {"mean_n2", b.mean_n2},
              {"se_n2", b.se_n2},           {"e_n_null", b.e_n_null},
              {"se_n_null", b.se_n_null},   {"e_n_alt", b.e_n_alt},
              {"se_n_alt", b.se_n_alt}};
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json_file(const fs::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

const NamedRule& find_rule(const ScenarioConfig& config, const std::string& name,
                           const std::string& ctx) {
  for (const auto& r : config.rules) {
    if (r.name == name) return r;
  }
  bad_field(ctx, "names unknown rule '" + name + "'");
}

RuleCurve tabulate_named(const ScenarioConfig& config, const NamedRule& rule) {
  return tabulate_rule(rule.spec, config.grid.z_lo, config.grid.z_hi,
                       config.grid.points, config.design);
}

json audit_report_json(const AuditReport& report) {
  json pts = json::array();
  for (const auto& p : report.points) {
    pts.push_back(json{{"z1", p.z1},
                       {"n2", p.n2},
                       {"implied_gamma", p.implied_gamma},
                       {"bound_kind", to_string(p.kind)},
                       {"concavity_status", to_string(p.certificate.status)}});
  }
  json anomalies = json::array();
  for (const auto& a : report.anomalies) {
    anomalies.push_back(json{{"z_first", report.points[a.first].z1},
                             {"z_last", report.points[a.last].z1},
                             {"first_index", a.first},
                             {"last_index", a.last},
                             {"reason", a.reason}});
  }
  return json{{"family", report.family},
              {"design", design_json(report.design)},
              {"points", pts},
              {"anomalies", anomalies}};
}

void run_audit_for(const ScenarioConfig& config, const RuleCurve& curve,
                   const std::string& name, const fs::path& out) {
  AuditReport report = implied_cost(curve, config.design);
  std::ostringstream csv_text;
  write_audit_csv(report, csv_text);
  write_text(out / ("audit_" + name + ".csv"), csv_text.str());
  write_json_file(out / ("audit_" + name + ".json"), audit_report_json(report));
}
}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }

  DesignParams design = parse_design(j);

  GridSettings grid{default_z_lo(design), default_z_hi(design), 501};
  if (j.contains("grid")) {
    const json& g = j["grid"];
    grid.z_lo = get_num_or(g, "z_lo", grid.z_lo);
    grid.z_hi = get_num_or(g, "z_hi", grid.z_hi);
    if (g.contains("points")) grid.points = g["points"].get<int>();
    if (!(grid.z_lo < grid.z_hi)) bad_field("grid.z_lo", "must be below grid.z_hi");
    if (grid.points < 2) bad_field("grid.points", "must be >= 2");
  }

  std::vector<NamedRule> rules;
  if (j.contains("rules")) {
    if (!j["rules"].is_array()) bad_field("rules", "must be an array");
    int idx = 0;
    for (const auto& r : j["rules"]) {
      std::string ctx = "rules[" + std::to_string(idx) + "].";
      std::string name = r.contains("name") ? r["name"].get<std::string>()
                                            : "rule" + std::to_string(idx);
      rules.push_back({name, parse_rule(r, ctx)});
      ++idx;
    }
  }

  SimSettings sim;
  sim.theta_true = {0.0, design.theta_alt};
  if (j.contains("sim")) {
    const json& s = j["sim"];
    if (s.contains("reps")) sim.reps = s["reps"].get<long>();
    if (s.contains("seed")) sim.seed = s["seed"].get<std::uint64_t>();
    if (s.contains("theta_true")) {
      sim.theta_true.clear();
      for (const auto& t : s["theta_true"]) sim.theta_true.push_back(t.get<double>());
    }
    if (sim.reps < 1) bad_field("sim.reps", "must be >= 1");
    if (sim.theta_true.empty()) bad_field("sim.theta_true", "must be non-empty");
  }

  std::optional<CalibrateSettings> calibrate;
  if (j.contains("calibrate")) {
    const json& c = j["calibrate"];
    CalibrateSettings cs;
    if (!c.contains("mode")) bad_field("calibrate.mode", "is required");
    cs.mode = c["mode"].get<std::string>();
    if (cs.mode == "budget_power") {
      cs.b0 = get_num(c, "b0", "calibrate.");
      cs.power = get_num(c, "power", "calibrate.");
    } else if (cs.mode == "match_reference") {
      if (!c.contains("reference")) bad_field("calibrate.reference", "is required");
      cs.reference = c["reference"].get<std::string>();
      if (c.contains("quantity")) {
        std::string q = c["quantity"].get<std::string>();
        if (q == "e_n_alt") cs.quantity = MatchQuantity::e_n_alt;
        else if (q == "power") cs.quantity = MatchQuantity::power;
        else bad_field("calibrate.quantity", "must be e_n_alt or power");
      }
      if (c.contains("lambda_ratio")) cs.lambda_ratio = c["lambda_ratio"].get<double>();
    } else {
      bad_field("calibrate.mode", "must be budget_power or match_reference");
    }
    calibrate = cs;
  }

  std::optional<AuditSettings> audit;
  if (j.contains("audit")) {
    const json& a = j["audit"];
    AuditSettings as;
    if (a.contains("rule")) as.rule = a["rule"].get<std::string>();
    if (a.contains("csv")) as.csv = a["csv"].get<std::string>();
    if (!as.rule && !as.csv) bad_field("audit", "needs 'rule' or 'csv'");
    audit = as;
  }

  std::optional<TimingSettings> timing;
  if (j.contains("timing")) {
    const json& t = j["timing"];
    TimingSettings ts;
    if (!t.contains("n1_values")) bad_field("timing.n1_values", "is required");
    for (const auto& v : t["n1_values"]) ts.n1_values.push_back(v.get<double>());
    ts.gamma = get_num(t, "gamma", "timing.");
    ts.lambda1 = get_num(t, "lambda1", "timing.");
    ts.lambda2 = get_num(t, "lambda2", "timing.");
    timing = ts;
  }

  return ScenarioConfig{design, grid,  std::move(rules),
                        sim,    calibrate, audit,
                        timing};
}

ScenarioConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void cmd_rule(const ScenarioConfig& config, const std::string& out_dir) {
  if (config.rules.empty())
    throw std::invalid_argument("config: field 'rules' must list at least one rule");
  fs::path out(out_dir);
  for (const auto& r : config.rules) {
    RuleCurve curve = tabulate_named(config, r);
    std::ostringstream text;
    write_rule_curve_csv(curve, text);
    write_text(out / (r.name + "_rule.csv"), text.str());
  }
}

void cmd_calibrate(const ScenarioConfig& config, const std::string& out_dir) {
  if (!config.calibrate)
    throw std::invalid_argument("config: field 'calibrate' is required");
  const auto& cs = *config.calibrate;
  fs::path out(out_dir);

  CalibrationTarget target = BudgetPowerTarget{};
  if (cs.mode == "budget_power") {
    target = BudgetPowerTarget{*cs.b0, *cs.power};
  } else {
    const NamedRule& ref = find_rule(config, *cs.reference, "calibrate.reference");
    target = MatchReferenceTarget{tabulate_named(config, ref), cs.quantity,
                                  cs.lambda_ratio};
  }

  json report{{"design", design_json(config.design)},
              {"tolerances", {{"e_n", 0.5}, {"power", 1e-4}}}};
  try {
    CalibrationResult res = calibrate_lambdas(target, config.design);
    report["status"] = "ok";
    report["target"] = res.target_text;
    report["lambda1"] = res.lambda1;
    report["lambda2"] = res.lambda2;
    report["iterations"] = res.iterations;
    report["residuals"] = {{"e_n", res.resid_e_n}, {"power", res.resid_power}};
    report["achieved"] = oc_json(res.achieved);
    write_json_file(out / "calibration.json", report);
  } catch (const InfeasibleTargetError& e) {
    report["status"] = "infeasible";
    report["error"] = e.what();
    write_json_file(out / "calibration.json", report);
    throw;
  }
}

void cmd_audit(const ScenarioConfig& config, const std::string& out_dir) {
  if (!config.audit) throw std::invalid_argument("config: field 'audit' is required");
  const auto& as = *config.audit;
  fs::path out(out_dir);
  if (as.rule) {
    const NamedRule& r = find_rule(config, *as.rule, "audit.rule");
    run_audit_for(config, tabulate_named(config, r), r.name, out);
  } else {
    std::ifstream in(*as.csv, std::ios::binary);
    if (!in) throw std::invalid_argument("audit: cannot open " + *as.csv);
    RuleCurve curve = rule_curve_from_csv(in, config.design);
    run_audit_for(config, curve, "external", out);
  }
}

void cmd_simulate(const ScenarioConfig& config, const std::string& out_dir,
                  const RunOverrides& overrides) {
  if (config.rules.empty())
    throw std::invalid_argument("config: field 'rules' must list at least one rule");
  SimSettings sim = config.sim;
  if (overrides.seed) sim.seed = *overrides.seed;
  if (overrides.reps) sim.reps = *overrides.reps;
  if (sim.reps < 1) throw std::invalid_argument("config: field 'sim.reps' must be >= 1");

  json batches = json::array();
  for (const auto& r : config.rules) {
    for (double theta : sim.theta_true) {
      SimConfig sc{sim.reps, sim.seed, theta, r.spec};
      BatchStats b = simulate_batch_stats(sc, config.design);
      json jb = batch_json(b);
      jb["rule"] = rule_json(r);
      batches.push_back(std::move(jb));
    }
  }
  json report{{"design", design_json(config.design)},
              {"seed", sim.seed},
              {"reps", sim.reps},
              {"batches", batches}};
  write_json_file(fs::path(out_dir) / "simulation.json", report);
}

std::vector<std::string> preset_names() {
  return {"jt_vs_lr", "timing", "roi", "cpz_audit"};
}

std::string preset_config_text(const std::string& name) {
  json j;
  json schizo{{"sigma", 7.5}, {"theta_alt", 1.6}, {"n1", 208},
              {"n_min", 442}, {"n_max", 884},     {"alpha", 0.025}};
  const double gamma = 0.25 / (4.0 * 7.5 * 7.5);
  if (name == "jt_vs_lr") {
    j["design"] = schizo;
    j["rules"] = json::array(
        {json{{"name", "jt"}, {"family", "jt"}, {"gamma", gamma}},
         json{{"name", "lr"},
              {"family", "lr"},
              {"lambda1", 0.65 * gamma},
              {"lambda2", 0.62 * gamma}}});
    j["sim"] = json{{"reps", 1000000}, {"seed", 1}, {"theta_true", {0.0, 1.6}}};
    j["audit"] = json{{"rule", "jt"}};
  } else if (name == "timing") {
    j["design"] = schizo;
    j["timing"] = json{{"n1_values", {80, 110, 140, 170, 200}},
                       {"gamma", gamma},
                       {"lambda1", 0.65 * gamma},
                       {"lambda2", 0.62 * gamma}};
  } else if (name == "roi") {
    j["design"] = schizo;
    json rules = json::array();
    const double pa0 = 0.5, pb0 = 2.0 / 3.0;
    for (double c : {40000.0, 70000.0, 100000.0}) {
      std::string tag = std::to_string(static_cast<int>(c / 1000)) + "k";
      rules.push_back(json{{"name", "roi_a_c" + tag},
                           {"family", "roi"},
                           {"cost_per_participant", c},
                           {"success_value", 1e8},
                           {"prior_null", pa0},
                           {"prior_alt", 1.0 - pa0}});
      rules.push_back(json{{"name", "roi_b_c" + tag},
                           {"family", "roi"},
                           {"cost_per_participant", c},
                           {"success_value", 1e8},
                           {"prior_null", pb0},
                           {"prior_alt", 1.0 - pb0}});
    }
    j["rules"] = rules;
  } else if (name == "cpz_audit") {
    j["design"] = json{{"sigma", 1.0}, {"theta_alt", 0.29}, {"n1", 140},
                       {"n_min", 280}, {"n_max", 420},      {"alpha", 0.025}};
    j["grid"] = json{{"z_lo", 0.5}, {"z_hi", 3.0}, {"points", 501}};
    j["rules"] = json::array({json{{"name", "cpz"},
                                   {"family", "cpz"},
                                   {"n_lo", 280},
                                   {"n_hi", 420},
                                   {"cp_floor", 0.8},
                                   {"cp_ceiling", 0.9}}});
    j["audit"] = json{{"rule", "cpz"}};
  } else {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + name + "'; valid presets: " + valid);
  }
  return j.dump(2) + "\n";
}

void cmd_scenario(const std::string& preset, const std::string& out_dir,
                  const RunOverrides& overrides) {
  ScenarioConfig config = parse_config_text(preset_config_text(preset));
  fs::path out(out_dir);

  if (preset == "timing") {
    const auto& t = *config.timing;
    auto entries = timing_sweep(t.n1_values, t.gamma, t.lambda1, t.lambda2,
                                config.design);
    json summary = json::array();
    for (const auto& e : entries) {
      std::string tag = "n1_" + std::to_string(static_cast<int>(e.n1));
      std::ostringstream jt_text, lr_text;
      write_rule_curve_csv(e.jt_curve, jt_text);
      write_rule_curve_csv(e.lr_curve, lr_text);
      write_text(out / ("jt_" + tag + ".csv"), jt_text.str());
      write_text(out / ("lr_" + tag + ".csv"), lr_text.str());
      summary.push_back(
          json{{"n1", e.n1},
               {"jt_ocs", oc_json(e.jt_ocs)},
               {"lr_ocs", oc_json(e.lr_ocs)},
               {"jt_first_spend_z",
                e.jt_first_spend_z ? json(*e.jt_first_spend_z) : json()},
               {"lr_first_spend_z",
                e.lr_first_spend_z ? json(*e.lr_first_spend_z) : json()}});
    }
    write_json_file(out / "timing_summary.json",
                    json{{"design", design_json(config.design)}, {"entries", summary}});
    return;
  }

  cmd_rule(config, out_dir);

  json ocs = json::object();
  for (const auto& r : config.rules) {
    ocs[r.name] = oc_json(operating_chars_quadrature(r.spec, config.design));
  }
  write_json_file(out / "operating_characteristics.json",
                  json{{"design", design_json(config.design)}, {"rules", ocs}});

  if (preset == "jt_vs_lr") {
    cmd_simulate(config, out_dir, overrides);
    for (const auto& r : config.rules)
      run_audit_for(config, tabulate_named(config, r), r.name, out);
  } else if (preset == "cpz_audit") {
    const auto& r = config.rules.front();
    run_audit_for(config, tabulate_named(config, r), r.name, out);
    const auto& p = std::get<CpzParams>(r.spec.def);
    auto cert = concavity_certificate(1.0, config.design, p.n_lo, p.n_hi);
    json summary{
        {"zone_lower_edge", solve_z1_for_cp(p.n_hi, p.cp_floor, config.design)},
        {"turning_point", solve_z1_for_cp(p.n_hi, p.cp_ceiling, config.design)},
        {"zone_upper_edge", solve_z1_for_cp(p.n_lo, p.cp_ceiling, config.design)},
        {"z_threshold", cert.z_threshold},
        {"cp_bound", cert.cp_bound}};
    write_json_file(out / "cpz_summary.json", summary);
  } else if (preset == "roi") {
    // pointwise orderings across priors and costs
    std::vector<RuleCurve> curves;
    curves.reserve(config.rules.size());
    for (const auto& r : config.rules) curves.push_back(tabulate_named(config, r));
    auto pointwise_geq = [](const RuleCurve& a, const RuleCurve& b) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.n2_cont[i] < b.n2_cont[i] - 1e-6) return false;
      }
      return true;
    };
    json orderings = json::object();
    for (std::size_t c = 0; c < 3; ++c) {
      orderings["prior_a_geq_prior_b_c" + std::to_string(c)] =
          pointwise_geq(curves[2 * c], curves[2 * c + 1]);
    }
    for (std::size_t c = 0; c + 1 < 3; ++c) {
      orderings["a_decreasing_in_c_" + std::to_string(c)] =
          pointwise_geq(curves[2 * c], curves[2 * (c + 1)]);
      orderings["b_decreasing_in_c_" + std::to_string(c)] =
          pointwise_geq(curves[2 * c + 1], curves[2 * (c + 1) + 1]);
    }
    write_json_file(out / "roi_summary.json", json{{"orderings", orderings}});
  }
}

}  // namespace ssr
