#pragma once

#include <cstdint>
#include <vector>

#include "ssr/calibration.hpp"
#include "ssr/design.hpp"
#include "ssr/rule.hpp"

namespace ssr {

struct TrialOutcome {
  double z1;
  long n2;  // integer-rounded rule output actually enrolled
  double z_combined;
  bool rejected;
};

struct SimConfig {
  long n_reps;
  std::uint64_t seed;
  double theta_true;  // effect generating the data; may differ from theta_alt
  RuleSpec rule;
  int workers = 0;  // 0 = hardware concurrency
};

/// Detailed batch aggregates. All accumulation is over integers (rejection
/// counts and integer sample sizes), so results are exactly independent of
/// evaluation order and thread count.
struct BatchStats {
  long n_reps;
  std::uint64_t seed;
  double theta_true;
  double reject_rate;
  double reject_se;
  double mean_n2;   // under theta_true
  double se_n2;
  double e_n_null;  // rule mean over the null interim stream (same draws)
  double se_n_null;
  double e_n_alt;   // rule mean over the theta_alt interim stream
  double se_n_alt;
};

/// One replicate, derived entirely from (seed, replicate).
TrialOutcome simulate_trial(const SimConfig& config, long replicate,
                            const DesignParams& design);

BatchStats simulate_batch_stats(const SimConfig& config, const DesignParams& design);

/// Monte Carlo operating characteristics. power is the rejection rate under
/// theta_true; type1 is the same estimate when theta_true = 0 and the
/// analytic alpha otherwise. The expected sample sizes under both hypotheses
/// come from applying the rule to the null/alternative interim streams built
/// from the same underlying draws.
OperatingChars simulate_batch(const SimConfig& config, const DesignParams& design);

/// Interim-timing sweep: rebuilds the design (drift and weights) for each
/// n1, holds the rule parameters fixed, and tabulates both rules with their
/// operating characteristics and first spending thresholds.
struct TimingSweepEntry {
  double n1;
  RuleCurve jt_curve;
  RuleCurve lr_curve;
  OperatingChars jt_ocs;
  OperatingChars lr_ocs;
  std::optional<double> jt_first_spend_z;
  std::optional<double> lr_first_spend_z;
};

std::vector<TimingSweepEntry> timing_sweep(const std::vector<double>& n1_values,
                                           double gamma, double lambda1,
                                           double lambda2,
                                           const DesignParams& base);

}  // namespace ssr
