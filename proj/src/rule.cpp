#include "ssr/rule.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ssr/conditional_power.hpp"
#include "ssr/csv.hpp"

namespace ssr {

namespace {
constexpr int kScanPoints = 512;
constexpr double kGoldenRatio = 0.6180339887498949;

double objective(double z1, double n2, double gamma, const DesignParams& d) {
  return conditional_power(z1, n2, d) - gamma * n2;
}

// Stationary point of the concave objective: mgp(n) = gamma, mgp strictly
// decreasing. Caller guarantees mgp(n_lo) > gamma > mgp(n_hi).
double bisect_stationary(double z1, double gamma, const DesignParams& d) {
  double lo = d.n_min, hi = d.n_max;
  for (int i = 0; i < 200 && hi - lo > 1e-11 * (d.n_max - d.n_min); ++i) {
    double mid = 0.5 * (lo + hi);
    (mgp(z1, mid, d) > gamma ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Golden-section maximisation of the objective on [a, b].
double golden_max(double z1, double gamma, double a, double b,
                  const DesignParams& d) {
  double x1 = b - kGoldenRatio * (b - a);
  double x2 = a + kGoldenRatio * (b - a);
  double f1 = objective(z1, x1, gamma, d);
  double f2 = objective(z1, x2, gamma, d);
  while (b - a > 1e-10 * (d.n_max - d.n_min)) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGoldenRatio * (b - a);
      f2 = objective(z1, x2, gamma, d);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGoldenRatio * (b - a);
      f1 = objective(z1, x1, gamma, d);
    }
  }
  return 0.5 * (a + b);
}

// Snap width shared by the optimiser, curve validation, and CSV flag
// derivation; keeping them identical is what lets near-transition grid
// points validate.
double snap_tol(const DesignParams& d) { return 1e-9 * (d.n_max - d.n_min); }

RulePoint flagged(double n2, const DesignParams& d) {
  double tol = snap_tol(d);
  if (n2 <= d.n_min + tol) return {d.n_min, BoundaryFlag::at_min};
  if (n2 >= d.n_max - tol) return {d.n_max, BoundaryFlag::at_max};
  return {n2, BoundaryFlag::interior};
}
}  // namespace

const char* to_string(BoundaryFlag f) {
  switch (f) {
    case BoundaryFlag::at_min:
      return "at_min";
    case BoundaryFlag::at_max:
      return "at_max";
    default:
      return "interior";
  }
}

BoundaryFlag boundary_flag_from_string(const std::string& s) {
  if (s == "at_min") return BoundaryFlag::at_min;
  if (s == "at_max") return BoundaryFlag::at_max;
  if (s == "interior") return BoundaryFlag::interior;
  throw std::invalid_argument("unknown boundary flag: " + s);
}

RulePoint optimize_n2(double z1, const CostSpec& cost, const DesignParams& design) {
  const double gamma = gamma_eval(cost, z1, design);
  const auto cert = concavity_certificate(z1, design, design.n_min, design.n_max);

  if (cert.certified()) {
    if (mgp(z1, design.n_min, design) <= gamma)
      return {design.n_min, BoundaryFlag::at_min};
    if (mgp(z1, design.n_max, design) >= gamma)
      return {design.n_max, BoundaryFlag::at_max};
    return {bisect_stationary(z1, gamma, design), BoundaryFlag::interior};
  }

  // No certificate: the objective can peak at n_min even when an interior
  // stationary point exists, so scan, refine, and compare both boundaries.
  double best_obj = objective(z1, design.n_min, gamma, design);
  const double step = (design.n_max - design.n_min) / (kScanPoints - 1);
  int best_i = 0;
  for (int i = 1; i < kScanPoints; ++i) {
    double n = design.n_min + step * i;
    double obj = objective(z1, n, gamma, design);
    if (obj > best_obj) {
      best_obj = obj;
      best_i = i;
    }
  }
  double lo = design.n_min + step * std::max(0, best_i - 1);
  double hi = design.n_min + step * std::min(kScanPoints - 1, best_i + 1);
  double refined = golden_max(z1, gamma, lo, hi, design);

  // Candidates in ascending n2 so exact ties resolve to the smaller size.
  double cand[3] = {design.n_min, refined, design.n_max};
  double pick = cand[0];
  double pick_obj = objective(z1, cand[0], gamma, design);
  for (int i = 1; i < 3; ++i) {
    double obj = objective(z1, cand[i], gamma, design);
    if (obj > pick_obj) {
      pick_obj = obj;
      pick = cand[i];
    }
  }
  return flagged(pick, design);
}

RulePoint jt_rule(double z1, double gamma, const DesignParams& design) {
  return optimize_n2(z1, ConstantCost{gamma}, design);
}

RulePoint lr_rule(double z1, double lambda1, double lambda2,
                  const DesignParams& design) {
  return optimize_n2(z1, LikelihoodRatioCost{lambda1, lambda2}, design);
}

RulePoint roi_rule(double z1, double cost_per_participant, double success_value,
                   double pi0, double pi1, const DesignParams& design) {
  return optimize_n2(z1, RoiCost{cost_per_participant, success_value, pi0, pi1},
                     design);
}

RulePoint cpz_rule(double z1, const CpzParams& cpz, const DesignParams& design) {
  if (!(design.n1 < cpz.n_lo && cpz.n_lo <= cpz.n_hi))
    throw std::invalid_argument("cpz: need n1 < n_lo <= n_hi");
  if (!(cpz.cp_floor > 0.0 && cpz.cp_floor < cpz.cp_ceiling && cpz.cp_ceiling < 1.0))
    throw std::invalid_argument("cpz: need 0 < cp_floor < cp_ceiling < 1");

  double cp_hi = conditional_power(z1, cpz.n_hi, design);
  if (cp_hi < cpz.cp_floor) return {cpz.n_lo, BoundaryFlag::at_min};
  if (cp_hi <= cpz.cp_ceiling) return {cpz.n_hi, BoundaryFlag::at_max};
  if (conditional_power(z1, cpz.n_lo, design) < cpz.cp_ceiling) {
    // reachable: CP straddles the ceiling between the caps
    double n2 = *solve_n2_for_cp(z1, cpz.cp_ceiling, design);
    double tol = 1e-9 * (cpz.n_hi - cpz.n_lo);
    if (n2 >= cpz.n_hi - tol) return {cpz.n_hi, BoundaryFlag::at_max};
    if (n2 <= cpz.n_lo + tol) return {cpz.n_lo, BoundaryFlag::at_min};
    return {n2, BoundaryFlag::interior};
  }
  return {cpz.n_lo, BoundaryFlag::at_min};
}

RuleSpec RuleSpec::jt(double gamma) { return {CostSpec{ConstantCost{gamma}}}; }

RuleSpec RuleSpec::lr(double lambda1, double lambda2) {
  return {CostSpec{LikelihoodRatioCost{lambda1, lambda2}}};
}

RuleSpec RuleSpec::roi(double cost_per_participant, double success_value,
                       double pi0, double pi1) {
  return {CostSpec{RoiCost{cost_per_participant, success_value, pi0, pi1}}};
}

RuleSpec RuleSpec::cpz(CpzParams p) { return {p}; }

RuleSpec RuleSpec::from_cost(CostSpec c) { return {std::move(c)}; }

std::string RuleSpec::family() const {
  if (std::holds_alternative<CpzParams>(def)) return "cpz";
  const auto& c = std::get<CostSpec>(def);
  if (std::holds_alternative<ConstantCost>(c)) return "jt";
  if (std::holds_alternative<LikelihoodRatioCost>(c)) return "lr";
  if (std::holds_alternative<RoiCost>(c)) return "roi";
  return "tabulated";
}

std::string RuleSpec::params_text() const {
  if (const auto* p = std::get_if<CpzParams>(&def)) {
    std::ostringstream os;
    os << "n_lo=" << p->n_lo << " n_hi=" << p->n_hi << " cp_floor=" << p->cp_floor
       << " cp_ceiling=" << p->cp_ceiling;
    return os.str();
  }
  return cost_params_text(std::get<CostSpec>(def));
}

const CostSpec* RuleSpec::cost() const { return std::get_if<CostSpec>(&def); }

RulePoint evaluate_rule(const RuleSpec& rule, double z1, const DesignParams& design) {
  if (const auto* p = std::get_if<CpzParams>(&rule.def))
    return cpz_rule(z1, *p, design);
  return optimize_n2(z1, std::get<CostSpec>(rule.def), design);
}

RuleFn rule_fn(const RuleSpec& rule, const DesignParams& design) {
  return [rule, design](double z1) { return evaluate_rule(rule, z1, design); };
}

double default_z_lo(const DesignParams&) { return -1.0; }
double default_z_hi(const DesignParams& design) { return design.delta + 5.0; }

long round_half_up(double n2) { return static_cast<long>(std::floor(n2 + 0.5)); }

void validate_curve(const RuleCurve& curve) {
  const auto& d = curve.design;
  if (curve.z_grid.size() < 2) throw std::invalid_argument("rule curve: need >= 2 points");
  if (curve.n2_cont.size() != curve.size() || curve.flags.size() != curve.size() ||
      curve.n2_int.size() != curve.size())
    throw std::invalid_argument("rule curve: ragged columns");
  double tol = snap_tol(d);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i && !(curve.z_grid[i] > curve.z_grid[i - 1]))
      throw std::invalid_argument("rule curve: z grid must be strictly increasing");
    double n2 = curve.n2_cont[i];
    if (!(n2 >= d.n_min - 1e-9 && n2 <= d.n_max + 1e-9))
      throw std::invalid_argument("rule curve: n2 outside [n_min, n_max]");
    switch (curve.flags[i]) {
      case BoundaryFlag::at_min:
        if (std::abs(n2 - d.n_min) > tol)
          throw std::invalid_argument("rule curve: at_min flag off the bound");
        break;
      case BoundaryFlag::at_max:
        if (std::abs(n2 - d.n_max) > tol)
          throw std::invalid_argument("rule curve: at_max flag off the bound");
        break;
      case BoundaryFlag::interior:
        if (!(n2 > d.n_min && n2 < d.n_max))
          throw std::invalid_argument("rule curve: interior flag on a bound");
        break;
    }
  }
}

RuleCurve tabulate_rule(const RuleSpec& rule, double z_lo, double z_hi,
                        int n_points, const DesignParams& design) {
  if (!(z_lo < z_hi)) throw std::invalid_argument("tabulate_rule: need z_lo < z_hi");
  if (n_points < 2) throw std::invalid_argument("tabulate_rule: need n_points >= 2");

  if (const auto* p = std::get_if<CpzParams>(&rule.def)) {
    // CPZ caps define the curve's feasible range; keep the design in sync so
    // the boundary flags match the stored bounds.
    if (std::abs(p->n_lo - design.n_min) > 1e-9 || std::abs(p->n_hi - design.n_max) > 1e-9)
      throw std::invalid_argument(
          "tabulate_rule: cpz caps must match the design's n_min/n_max");
  }

  RuleCurve curve{{}, {}, {}, {}, design, rule.family(), rule.params_text()};
  curve.z_grid.reserve(n_points);
  curve.n2_cont.reserve(n_points);
  curve.n2_int.reserve(n_points);
  curve.flags.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    double z = z_lo + (z_hi - z_lo) * i / (n_points - 1);
    RulePoint pt = evaluate_rule(rule, z, design);
    curve.z_grid.push_back(z);
    curve.n2_cont.push_back(pt.n2);
    curve.n2_int.push_back(round_half_up(pt.n2));
    curve.flags.push_back(pt.flag);
  }
  validate_curve(curve);
  return curve;
}

double curve_interp(const RuleCurve& curve, double z1) {
  const auto& z = curve.z_grid;
  if (z1 <= z.front()) return curve.n2_cont.front();
  if (z1 >= z.back()) return curve.n2_cont.back();
  auto it = std::upper_bound(z.begin(), z.end(), z1);
  std::size_t j = static_cast<std::size_t>(it - z.begin());
  double t = (z1 - z[j - 1]) / (z[j] - z[j - 1]);
  return (1.0 - t) * curve.n2_cont[j - 1] + t * curve.n2_cont[j];
}

void write_rule_curve_csv(const RuleCurve& curve, std::ostream& out) {
  csv::write_row(out, {"z1", "n2_continuous", "n2_integer", "boundary_flag"});
  for (std::size_t i = 0; i < curve.size(); ++i) {
    csv::write_row(out, {csv::format(curve.z_grid[i]), csv::format(curve.n2_cont[i]),
                         std::to_string(curve.n2_int[i]), to_string(curve.flags[i])});
  }
}

RuleCurve rule_curve_from_csv(std::istream& in, const DesignParams& design) {
  auto rows = csv::read(in);
  if (rows.size() < 2) throw std::invalid_argument("rule curve csv: no data rows");
  const auto& header = rows[0];
  if (header.empty() || header[0] != "z1")
    throw std::invalid_argument("rule curve csv: first column must be z1");

  RuleCurve curve{{}, {}, {}, {}, design, "external", ""};
  bool has_flags = header.size() >= 4;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() < 2) throw std::invalid_argument("rule curve csv: short row");
    double z = csv::to_double(r[0]);
    double n2 = csv::to_double(r[1]);
    curve.z_grid.push_back(z);
    curve.n2_cont.push_back(n2);
    curve.n2_int.push_back(r.size() >= 3 ? static_cast<long>(csv::to_double(r[2]))
                                         : round_half_up(n2));
    if (has_flags && r.size() >= 4) {
      curve.flags.push_back(boundary_flag_from_string(r[3]));
    } else {
      curve.flags.push_back(flagged(n2, design).flag);
    }
  }
  validate_curve(curve);
  return curve;
}

std::optional<double> first_exceedance_z(const RuleFn& rule,
                                         const DesignParams& design,
                                         double z_lo, double z_hi) {
  const int n = 2401;
  const double tol = 1e-7;
  auto above = [&](double z) { return rule(z).n2 > design.n_min + tol; };

  double prev = z_lo;
  bool prev_above = above(z_lo);
  if (prev_above) return z_lo;
  for (int i = 1; i < n; ++i) {
    double z = z_lo + (z_hi - z_lo) * i / (n - 1);
    if (above(z)) {
      double lo = prev, hi = z;
      for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
        double mid = 0.5 * (lo + hi);
        (above(mid) ? hi : lo) = mid;
      }
      return hi;
    }
    prev = z;
  }
  return std::nullopt;
}

}  // namespace ssr
