#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ssr/calibration.hpp"
#include "ssr/design.hpp"
#include "ssr/rule.hpp"
#include "ssr/simulate.hpp"

namespace ssr {

struct NamedRule {
  std::string name;
  RuleSpec spec;
};

struct GridSettings {
  double z_lo;
  double z_hi;
  int points;
};

struct SimSettings {
  long reps = 100000;
  std::uint64_t seed = 1;
  std::vector<double> theta_true;  // one batch per value
};

struct CalibrateSettings {
  // budget_power mode
  std::optional<double> b0;
  std::optional<double> power;
  // match_reference mode
  std::optional<std::string> reference;  // names a rule block
  MatchQuantity quantity = MatchQuantity::e_n_alt;
  std::optional<double> lambda_ratio;
  std::string mode;  // "budget_power" | "match_reference"
};

struct AuditSettings {
  std::optional<std::string> rule;  // names a rule block
  std::optional<std::string> csv;   // or an external curve
};

struct TimingSettings {
  std::vector<double> n1_values;
  double gamma;
  double lambda1;
  double lambda2;
};

struct ScenarioConfig {
  DesignParams design;
  GridSettings grid;
  std::vector<NamedRule> rules;
  SimSettings sim;
  std::optional<CalibrateSettings> calibrate;
  std::optional<AuditSettings> audit;
  std::optional<TimingSettings> timing;
};

/// Parses the JSON config format; throws std::invalid_argument naming the
/// offending field.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig load_config_file(const std::string& path);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<long> reps;
};

void cmd_rule(const ScenarioConfig& config, const std::string& out_dir);
void cmd_calibrate(const ScenarioConfig& config, const std::string& out_dir);
void cmd_audit(const ScenarioConfig& config, const std::string& out_dir);
void cmd_simulate(const ScenarioConfig& config, const std::string& out_dir,
                  const RunOverrides& overrides = {});

std::vector<std::string> preset_names();

/// Canonical preset config (identical to the committed presets/<name>.json).
std::string preset_config_text(const std::string& name);

void cmd_scenario(const std::string& preset, const std::string& out_dir,
                  const RunOverrides& overrides = {});

}  // namespace ssr
