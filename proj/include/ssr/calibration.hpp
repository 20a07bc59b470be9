#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ssr/design.hpp"
#include "ssr/rule.hpp"

namespace ssr {

enum class OcMethod { quadrature, monte_carlo };

/// Unconditional operating characteristics of a re-estimation rule.
/// type1 from the quadrature path is the analytic alpha of the combination
/// test, which is exact by construction with frozen weights.
struct OperatingChars {
  double power;     // P(reject) under theta_alt
  double e_n_null;  // E[N] under theta = 0
  double e_n_alt;   // E[N] under theta_alt
  double type1;
  OcMethod method;
  double error_bound;  // quadrature tolerance achieved or max MC standard error
};

/// Interior breakpoints of the rule on [z_lo, z_hi]: boundary-flag
/// transitions and jumps in n2, each refined by bisection. Integrating
/// between these points keeps every quadrature piece smooth.
std::vector<double> rule_breakpoints(const RuleFn& rule, const DesignParams& design,
                                     double z_lo, double z_hi);

OperatingChars operating_chars_quadrature(const RuleFn& rule,
                                          const DesignParams& design);
OperatingChars operating_chars_quadrature(const RuleSpec& rule,
                                          const DesignParams& design);
OperatingChars operating_chars_quadrature(const RuleCurve& curve,
                                          const DesignParams& design);

/// Power of the fixed-size design n2 = n_const under the combination test.
double fixed_design_power(double n_const, const DesignParams& design);

/// Calibrate (lambda1, lambda2) so that E_0[N] = b0 and power = pi_target.
struct BudgetPowerTarget {
  double b0;
  double pi_target;
  double initial_lambda = 1e-3;
};

enum class MatchQuantity { e_n_alt, power };

/// Calibrate the likelihood-ratio family against a reference rule. With
/// lambda_ratio given (lambda2/lambda1 held fixed) a single quantity is
/// matched by a safeguarded secant in lambda1; otherwise both e_n_alt and
/// power of the reference are matched by the two-dimensional solver.
struct MatchReferenceTarget {
  RuleCurve reference;
  MatchQuantity quantity = MatchQuantity::e_n_alt;
  std::optional<double> lambda_ratio;
  double initial_lambda = 1e-3;
};

using CalibrationTarget = std::variant<BudgetPowerTarget, MatchReferenceTarget>;

struct InfeasibleTargetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CalibrationStagnation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CalibrationResult {
  double lambda1;
  double lambda2;
  int iterations;
  double resid_e_n;   // achieved minus target, expected-N equation
  double resid_power; // achieved minus target, power equation
  OperatingChars achieved;
  std::string target_text;
};

CalibrationResult calibrate_lambdas(const CalibrationTarget& target,
                                    const DesignParams& design);

}  // namespace ssr
