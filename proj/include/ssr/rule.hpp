#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "ssr/cost.hpp"
#include "ssr/design.hpp"

namespace ssr {

enum class BoundaryFlag { interior, at_min, at_max };

const char* to_string(BoundaryFlag f);
BoundaryFlag boundary_flag_from_string(const std::string& s);

struct RulePoint {
  double n2;
  BoundaryFlag flag;
};

/// Constrained promising zone parameters: sample size caps plus a floor and
/// ceiling on conditional power.
struct CpzParams {
  double n_lo;
  double n_hi;
  double cp_floor;
  double cp_ceiling;
};

/// Maximises CP(z1, n2) - gamma(z1) * n2 over n2 in [n_min, n_max].
///
/// When the concavity certificate holds at z1, the marginal gain in power is
/// strictly decreasing in n2 and the stationary point mgp = gamma is found by
/// bisection (with the boundary shortcuts mgp(n_min) <= gamma and
/// mgp(n_max) >= gamma). Without a certificate the objective may be bimodal,
/// so a 512-point grid scan refined by golden section is used and both
/// boundary values are always cross-checked. Ties break toward smaller n2.
RulePoint optimize_n2(double z1, const CostSpec& cost, const DesignParams& design);

RulePoint jt_rule(double z1, double gamma, const DesignParams& design);
RulePoint lr_rule(double z1, double lambda1, double lambda2,
                  const DesignParams& design);
RulePoint roi_rule(double z1, double cost_per_participant, double success_value,
                   double pi0, double pi1, const DesignParams& design);

/// Maximise CP subject to n_lo <= n2 <= n_hi, CP >= cp_floor where reachable,
/// CP <= cp_ceiling.
RulePoint cpz_rule(double z1, const CpzParams& cpz, const DesignParams& design);

/// A rule family with its parameters: either a dynamic-cost optimisation or
/// the constrained promising zone.
struct RuleSpec {
  std::variant<CostSpec, CpzParams> def;

  static RuleSpec jt(double gamma);
  static RuleSpec lr(double lambda1, double lambda2);
  static RuleSpec roi(double cost_per_participant, double success_value,
                      double pi0, double pi1);
  static RuleSpec cpz(CpzParams p);
  static RuleSpec from_cost(CostSpec c);

  std::string family() const;
  std::string params_text() const;
  const CostSpec* cost() const;  // null for cpz
};

RulePoint evaluate_rule(const RuleSpec& rule, double z1, const DesignParams& design);

using RuleFn = std::function<RulePoint(double)>;
RuleFn rule_fn(const RuleSpec& rule, const DesignParams& design);

/// A rule tabulated on a z1 grid. Carries both the continuous optimiser
/// output and its integer rounding (half up); downstream derivative work
/// uses the continuous column, simulation the integer one.
struct RuleCurve {
  std::vector<double> z_grid;
  std::vector<double> n2_cont;
  std::vector<long> n2_int;
  std::vector<BoundaryFlag> flags;
  DesignParams design;
  std::string family;  // provenance
  std::string params;  // provenance

  std::size_t size() const { return z_grid.size(); }
};

void validate_curve(const RuleCurve& curve);

/// Default tabulation window [-1, delta + 5].
double default_z_lo(const DesignParams& design);
double default_z_hi(const DesignParams& design);

long round_half_up(double n2);

RuleCurve tabulate_rule(const RuleSpec& rule, double z_lo, double z_hi,
                        int n_points, const DesignParams& design);

/// Piecewise-linear interpolation of the continuous column, clamped to the
/// end values outside the grid.
double curve_interp(const RuleCurve& curve, double z1);

void write_rule_curve_csv(const RuleCurve& curve, std::ostream& out);
RuleCurve rule_curve_from_csv(std::istream& in, const DesignParams& design);

/// Smallest z1 in [z_lo, z_hi] at which the rule spends above n_min
/// (scan plus bisection); empty when it never does.
std::optional<double> first_exceedance_z(const RuleFn& rule,
                                         const DesignParams& design,
                                         double z_lo, double z_hi);

}  // namespace ssr
