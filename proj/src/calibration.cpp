#include "ssr/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "ssr/conditional_power.hpp"
#include "ssr/normal.hpp"
#include "ssr/quadrature.hpp"

namespace ssr {

namespace {
constexpr double kTolAbs = 1e-7;
constexpr double kTolRel = 1e-9;
constexpr int kMaxLevels = 20;
constexpr double kTolEN = 0.5;     // participants
constexpr double kTolPower = 1e-4;

double integration_lo(const DesignParams& d) { return std::min(0.0, d.delta) - 8.0; }
double integration_hi(const DesignParams& d) { return std::max(0.0, d.delta) + 8.0; }

// Bisect a detected transition between za and zb down to ~1e-12 width. The
// comparator says whether z is still on the same branch as za.
template <typename SameBranch>
double refine_transition(double za, double zb, SameBranch same) {
  for (int i = 0; i < 60 && zb - za > 1e-12 * std::max(1.0, std::abs(zb)); ++i) {
    double mid = 0.5 * (za + zb);
    (same(mid) ? za : zb) = mid;
  }
  return 0.5 * (za + zb);
}
}  // namespace

std::vector<double> rule_breakpoints(const RuleFn& rule, const DesignParams& design,
                                     double z_lo, double z_hi) {
  const int n = 1201;
  std::vector<double> zs(n), n2(n);
  std::vector<BoundaryFlag> fl(n);
  for (int i = 0; i < n; ++i) {
    zs[i] = z_lo + (z_hi - z_lo) * i / (n - 1);
    RulePoint p = rule(zs[i]);
    n2[i] = p.n2;
    fl[i] = p.flag;
  }

  // A jump shows up as an isolated spike in the adjacent differences; a
  // steep smooth stretch has comparable differences on both sides.
  std::vector<double> diffs;
  diffs.reserve(n - 1);
  for (int i = 0; i + 1 < n; ++i) diffs.push_back(std::abs(n2[i + 1] - n2[i]));
  const double floor_tol = std::max(1e-3 * (design.n_max - design.n_min), 1e-6);

  std::vector<double> out;
  for (int i = 0; i + 1 < n; ++i) {
    bool flag_change = fl[i] != fl[i + 1];
    double neighbor = std::max(i > 0 ? diffs[i - 1] : 0.0,
                               i + 2 < n ? diffs[i + 1] : 0.0);
    bool jump = diffs[i] > std::max(4.0 * neighbor, floor_tol);
    if (!flag_change && !jump) continue;
    BoundaryFlag f0 = fl[i];
    double base = n2[i];
    double half_jump = 0.5 * diffs[i];
    out.push_back(refine_transition(zs[i], zs[i + 1], [&](double z) {
      RulePoint p = rule(z);
      if (flag_change) return p.flag == f0;
      return std::abs(p.n2 - base) < half_jump;
    }));
  }
  return out;
}

OperatingChars operating_chars_quadrature(const RuleFn& rule,
                                          const DesignParams& design) {
  const double lo = integration_lo(design), hi = integration_hi(design);
  auto breaks = rule_breakpoints(rule, design, lo, hi);

  VectorIntegrand f = [&](double z, std::span<double> out) {
    double n2 = rule(z).n2;
    double f_null = interim_density(z, Hypothesis::null, design);
    double f_alt = interim_density(z, Hypothesis::alternative, design);
    out[0] = conditional_power(z, n2, design) * f_alt;
    out[1] = n2 * f_null;
    out[2] = n2 * f_alt;
  };
  auto q = integrate_piecewise(f, 3, lo, hi, breaks, kTolAbs, kTolRel, kMaxLevels);

  OperatingChars oc{};
  oc.power = q.values[0];
  oc.e_n_null = q.values[1];
  oc.e_n_alt = q.values[2];
  oc.type1 = design.alpha;
  oc.method = OcMethod::quadrature;
  oc.error_bound = std::max(q.last_delta, kTolAbs);
  return oc;
}

OperatingChars operating_chars_quadrature(const RuleSpec& rule,
                                          const DesignParams& design) {
  return operating_chars_quadrature(rule_fn(rule, design), design);
}

OperatingChars operating_chars_quadrature(const RuleCurve& curve,
                                          const DesignParams& design) {
  if (!same_design(curve.design, design))
    throw std::invalid_argument("operating_chars_quadrature: design mismatch");
  RuleFn fn = [&curve, &design](double z) {
    double n2 = curve_interp(curve, z);
    double tol = 1e-9 * (design.n_max - design.n_min);
    BoundaryFlag f = BoundaryFlag::interior;
    if (n2 <= design.n_min + tol) f = BoundaryFlag::at_min;
    else if (n2 >= design.n_max - tol) f = BoundaryFlag::at_max;
    return RulePoint{n2, f};
  };
  return operating_chars_quadrature(fn, design);
}

double fixed_design_power(double n_const, const DesignParams& design) {
  if (!(n_const > design.n1))
    throw std::invalid_argument("fixed_design_power: n_const must exceed n1");
  double mean = design.w1 * design.delta +
                design.w2 * design.k * std::sqrt(n_const - design.n1);
  return norm_cdf(mean - design.c_crit);
}

namespace {
OperatingChars lr_ocs(double lambda1, double lambda2, const DesignParams& d) {
  return operating_chars_quadrature(RuleSpec::lr(lambda1, lambda2), d);
}

// Shift both multipliers until the rule leaves whichever sample-size bound it
// is stuck on; the Jacobian vanishes on those plateaus.
void prescale(double& l1, double& l2, const DesignParams& d) {
  const double margin = 0.02 * (d.n_max - d.n_min);
  for (int i = 0; i < 80; ++i) {
    OperatingChars oc = lr_ocs(l1, l2, d);
    if (oc.e_n_null <= d.n_min + margin) {
      l1 *= 0.5;
      l2 *= 0.5;
    } else if (oc.e_n_null >= d.n_max - margin) {
      l1 *= 2.0;
      l2 *= 2.0;
    } else {
      return;
    }
  }
  throw CalibrationStagnation("calibration: could not leave the boundary plateau");
}

CalibrationResult solve_two_dim(double target_en, bool en_is_null,
                                double target_power, double init_lambda,
                                const std::string& target_text,
                                const DesignParams& d) {
  double l1 = init_lambda, l2 = init_lambda;
  prescale(l1, l2, d);

  const double en_scale = 1.0 / (d.n_max - d.n_min);
  auto resid = [&](const OperatingChars& oc) {
    double en = en_is_null ? oc.e_n_null : oc.e_n_alt;
    return std::array<double, 2>{en - target_en, oc.power - target_power};
  };
  auto scaled_norm = [&](const std::array<double, 2>& r) {
    return std::hypot(r[0] * en_scale, r[1]);
  };

  double x1 = std::log(l1), x2 = std::log(l2);
  OperatingChars oc = lr_ocs(std::exp(x1), std::exp(x2), d);
  auto r = resid(oc);
  int it = 0;
  for (; it < 60; ++it) {
    if (std::abs(r[0]) <= kTolEN && std::abs(r[1]) <= kTolPower) break;

    const double h = 1e-4;
    OperatingChars oc1 = lr_ocs(std::exp(x1 + h), std::exp(x2), d);
    OperatingChars oc2 = lr_ocs(std::exp(x1), std::exp(x2 + h), d);
    auto r1 = resid(oc1);
    auto r2 = resid(oc2);
    double j11 = (r1[0] - r[0]) / h, j12 = (r2[0] - r[0]) / h;
    double j21 = (r1[1] - r[1]) / h, j22 = (r2[1] - r[1]) / h;
    double det = j11 * j22 - j12 * j21;
    if (std::abs(det) < 1e-30) {
      std::ostringstream os;
      os << "calibration: singular Jacobian at lambda1=" << std::exp(x1)
         << " lambda2=" << std::exp(x2) << " residual (" << r[0] << ", " << r[1]
         << ")";
      throw CalibrationStagnation(os.str());
    }
    double s1 = (j22 * r[0] - j12 * r[1]) / det;
    double s2 = (-j21 * r[0] + j11 * r[1]) / det;

    double base = scaled_norm(r);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k) {
      OperatingChars ocn = lr_ocs(std::exp(x1 - t * s1), std::exp(x2 - t * s2), d);
      auto rn = resid(ocn);
      if (scaled_norm(rn) < base) {
        x1 -= t * s1;
        x2 -= t * s2;
        oc = ocn;
        r = rn;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      std::ostringstream os;
      os << "calibration: Newton stagnated (step below 2^-30) at lambda1="
         << std::exp(x1) << " lambda2=" << std::exp(x2) << " residual (" << r[0]
         << ", " << r[1] << ") after " << it << " iterations";
      throw CalibrationStagnation(os.str());
    }
  }
  if (!(std::abs(r[0]) <= kTolEN && std::abs(r[1]) <= kTolPower)) {
    std::ostringstream os;
    os << "calibration: no convergence after 60 iterations, residual (" << r[0]
       << ", " << r[1] << ")";
    throw CalibrationStagnation(os.str());
  }
  return CalibrationResult{std::exp(x1), std::exp(x2), it,      r[0],
                           r[1],         oc,           target_text};
}
}  // namespace

CalibrationResult calibrate_lambdas(const CalibrationTarget& target,
                                    const DesignParams& design) {
  if (const auto* bp = std::get_if<BudgetPowerTarget>(&target)) {
    // Boundary rules bracket what any multiplier pair can reach.
    double power_floor = fixed_design_power(design.n_min, design);
    double power_cap = fixed_design_power(design.n_max, design);
    if (!(bp->b0 > design.n_min && bp->b0 < design.n_max)) {
      std::ostringstream os;
      os << "infeasible target: b0=" << bp->b0 << " outside (" << design.n_min
         << ", " << design.n_max << ")";
      throw InfeasibleTargetError(os.str());
    }
    if (!(bp->pi_target > power_floor && bp->pi_target < power_cap)) {
      std::ostringstream os;
      os << "infeasible target: power " << bp->pi_target
         << " outside the achievable range (" << power_floor << ", " << power_cap
         << ")";
      throw InfeasibleTargetError(os.str());
    }
    std::ostringstream os;
    os << "budget_power b0=" << bp->b0 << " pi=" << bp->pi_target;
    return solve_two_dim(bp->b0, /*en_is_null=*/true, bp->pi_target,
                         bp->initial_lambda, os.str(), design);
  }

  const auto& mr = std::get<MatchReferenceTarget>(target);
  OperatingChars ref = operating_chars_quadrature(mr.reference, design);

  if (!mr.lambda_ratio) {
    std::ostringstream os;
    os << "match_reference two-dimensional e_n_alt=" << ref.e_n_alt
       << " power=" << ref.power;
    return solve_two_dim(ref.e_n_alt, /*en_is_null=*/false, ref.power,
                         mr.initial_lambda, os.str(), design);
  }

  // One-dimensional: lambda2 = ratio * lambda1; the matched quantity is
  // strictly decreasing in lambda1, so bracket by doubling then close in with
  // a bisection-safeguarded secant.
  const double ratio = *mr.lambda_ratio;
  if (!(ratio >= 0.0))
    throw std::invalid_argument("calibrate: lambda_ratio must be >= 0");
  double target_value =
      mr.quantity == MatchQuantity::e_n_alt ? ref.e_n_alt : ref.power;
  double tol = mr.quantity == MatchQuantity::e_n_alt ? kTolEN : kTolPower;

  auto value_of = [&](double l1) {
    OperatingChars oc = lr_ocs(l1, ratio * l1, design);
    return mr.quantity == MatchQuantity::e_n_alt ? oc.e_n_alt : oc.power;
  };

  double lo = mr.initial_lambda, hi = mr.initial_lambda;
  double f_lo = value_of(lo) - target_value;  // f decreasing in lambda
  double f_hi = f_lo;
  int it = 0;
  for (; it < 80 && f_lo < 0.0; ++it) {
    lo *= 0.5;
    f_lo = value_of(lo) - target_value;
  }
  for (; it < 160 && f_hi > 0.0; ++it) {
    hi *= 2.0;
    f_hi = value_of(hi) - target_value;
  }
  if (f_lo < 0.0 || f_hi > 0.0) {
    std::ostringstream os;
    os << "infeasible target: reference " << target_value
       << " not bracketed by the lambda family";
    throw InfeasibleTargetError(os.str());
  }
  double a = std::log(lo), b = std::log(hi), fa = f_lo, fb = f_hi;
  double x = 0.5 * (a + b), fx = value_of(std::exp(x)) - target_value;
  for (; it < 260 && std::abs(fx) > tol; ++it) {
    if (fx > 0.0) {
      a = x;
      fa = fx;
    } else {
      b = x;
      fb = fx;
    }
    double secant = (fa != fb) ? a + fa * (b - a) / (fa - fb) : 0.5 * (a + b);
    x = (secant > a && secant < b) ? secant : 0.5 * (a + b);
    fx = value_of(std::exp(x)) - target_value;
  }
  if (std::abs(fx) > tol)
    throw CalibrationStagnation("calibration: secant failed to converge");

  double l1 = std::exp(x);
  OperatingChars oc = lr_ocs(l1, ratio * l1, design);
  std::ostringstream os;
  os << "match_reference quantity="
     << (mr.quantity == MatchQuantity::e_n_alt ? "e_n_alt" : "power")
     << " target=" << target_value << " lambda_ratio=" << ratio;
  double resid_en = oc.e_n_alt - ref.e_n_alt;
  double resid_power = oc.power - ref.power;
  return CalibrationResult{l1, ratio * l1, it, resid_en, resid_power, oc, os.str()};
}

}  // namespace ssr
