// Command-line front end: scenario configs in, CSV/JSON data out.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ssr/calibration.hpp"
#include "ssr/scenario.hpp"

namespace {
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

struct CommonOpts {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<long> reps;
};

ssr::RunOverrides overrides_of(const CommonOpts& o) { return {o.seed, o.reps}; }
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sample size re-estimation rules under dynamic per-participant costs"};
  app.require_subcommand(1);

  CommonOpts rule_o, cal_o, audit_o, sim_o, scen_o;
  std::string preset;

  auto add_common = [](CLI::App* cmd, CommonOpts& o, bool needs_config) {
    if (needs_config)
      cmd->add_option("--config", o.config_path, "path to a JSON scenario config")
          ->required();
    cmd->add_option("--out", o.out_dir, "output directory (default: current)");
  };

  auto* rule_cmd = app.add_subcommand("rule", "tabulate each configured rule to CSV");
  add_common(rule_cmd, rule_o, true);

  auto* cal_cmd = app.add_subcommand("calibrate", "calibrate likelihood-ratio multipliers");
  add_common(cal_cmd, cal_o, true);

  auto* audit_cmd = app.add_subcommand("audit", "extract the implied cost of a rule");
  add_common(audit_cmd, audit_o, true);

  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo operating characteristics");
  add_common(sim_cmd, sim_o, true);
  sim_cmd->add_option("--seed", sim_o.seed, "override the config seed");
  sim_cmd->add_option("--reps", sim_o.reps, "override the config replicate count");

  auto* scen_cmd = app.add_subcommand("scenario", "run a named preset end to end");
  scen_cmd->add_option("name", preset, "preset name")->required();
  add_common(scen_cmd, scen_o, false);
  scen_cmd->add_option("--seed", scen_o.seed, "override the preset seed");
  scen_cmd->add_option("--reps", scen_o.reps, "override the preset replicate count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (rule_cmd->parsed()) {
      ssr::cmd_rule(ssr::load_config_file(rule_o.config_path), rule_o.out_dir);
    } else if (cal_cmd->parsed()) {
      ssr::cmd_calibrate(ssr::load_config_file(cal_o.config_path), cal_o.out_dir);
    } else if (audit_cmd->parsed()) {
      ssr::cmd_audit(ssr::load_config_file(audit_o.config_path), audit_o.out_dir);
    } else if (sim_cmd->parsed()) {
      ssr::cmd_simulate(ssr::load_config_file(sim_o.config_path), sim_o.out_dir,
                        overrides_of(sim_o));
    } else if (scen_cmd->parsed()) {
      ssr::cmd_scenario(preset, scen_o.out_dir, overrides_of(scen_o));
    }
  } catch (const ssr::InfeasibleTargetError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitValidation;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  }
  return kExitOk;
}
