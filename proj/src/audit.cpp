#include "ssr/audit.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "ssr/csv.hpp"

namespace ssr {

namespace {
// gamma* rises must exceed this relative slack before they count as
// "increasing" (guards against optimizer noise on flat stretches).
constexpr double kIncreaseSlack = 1e-9;
constexpr double kJumpFactor = 10.0;
}  // namespace

const char* to_string(BoundKind k) {
  switch (k) {
    case BoundKind::upper_bound_at_min:
      return "upper_bound_at_min";
    case BoundKind::lower_bound_at_max:
      return "lower_bound_at_max";
    default:
      return "exact";
  }
}

AuditReport implied_cost(const RuleCurve& curve, const DesignParams& design) {
  if (!same_design(curve.design, design))
    throw std::invalid_argument("implied_cost: curve was built for a different design");
  validate_curve(curve);

  AuditReport report{{}, {}, design, curve.family};
  report.points.reserve(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    double z1 = curve.z_grid[i];
    AuditPoint pt{};
    pt.z1 = z1;
    pt.n2 = curve.n2_cont[i];
    pt.certificate = concavity_certificate(z1, design, design.n_min, design.n_max);
    switch (curve.flags[i]) {
      case BoundaryFlag::at_min:
        pt.kind = BoundKind::upper_bound_at_min;
        pt.implied_gamma = mgp(z1, design.n_min, design);
        break;
      case BoundaryFlag::at_max:
        pt.kind = BoundKind::lower_bound_at_max;
        pt.implied_gamma = mgp(z1, design.n_max, design);
        break;
      case BoundaryFlag::interior:
        pt.kind = BoundKind::exact;
        pt.implied_gamma = mgp(z1, pt.n2, design);
        break;
    }
    report.points.push_back(pt);
  }
  report.anomalies = audit_flags(report);
  return report;
}

std::vector<AuditAnomaly> audit_flags(const AuditReport& report) {
  std::vector<AuditAnomaly> out;
  const auto& pts = report.points;

  // (a) gamma* increasing with z1 across certified interior stretches.
  std::size_t run_start = 0;
  bool in_run = false;
  auto close_run = [&](std::size_t end) {
    if (in_run) {
      out.push_back({run_start, end, "increasing_cost"});
      in_run = false;
    }
  };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    bool both_interior = pts[i].kind == BoundKind::exact &&
                         pts[i + 1].kind == BoundKind::exact;
    bool both_certified =
        pts[i].certificate.certified() && pts[i + 1].certificate.certified();
    bool rising = pts[i + 1].implied_gamma >
                  pts[i].implied_gamma * (1.0 + kIncreaseSlack);
    if (both_interior && both_certified && rising) {
      if (!in_run) {
        run_start = i;
        in_run = true;
      }
    } else {
      close_run(i);
    }
  }
  close_run(pts.size() - 1);

  // (b) 10x discontinuities and direct min<->max flips.
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    double a = pts[i].implied_gamma, b = pts[i + 1].implied_gamma;
    if (a > 0.0 && b > 0.0 && (b > kJumpFactor * a || a > kJumpFactor * b)) {
      out.push_back({i, i + 1, "cost_jump"});
    }
    bool min_max_flip =
        (pts[i].kind == BoundKind::upper_bound_at_min &&
         pts[i + 1].kind == BoundKind::lower_bound_at_max) ||
        (pts[i].kind == BoundKind::lower_bound_at_max &&
         pts[i + 1].kind == BoundKind::upper_bound_at_min);
    if (min_max_flip) out.push_back({i, i + 1, "rule_jump"});
  }

  // (c) interior spending without a concavity certificate.
  bool in_unc = false;
  std::size_t unc_start = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool unc = pts[i].kind == BoundKind::exact && !pts[i].certificate.certified();
    if (unc && !in_unc) {
      unc_start = i;
      in_unc = true;
    } else if (!unc && in_unc) {
      out.push_back({unc_start, i - 1, "uncertified_interior"});
      in_unc = false;
    }
  }
  if (in_unc) out.push_back({unc_start, pts.size() - 1, "uncertified_interior"});

  return out;
}

RoundtripReport roundtrip_check(const RuleCurve& curve, const DesignParams& design,
                                double tol_participants) {
  AuditReport report = implied_cost(curve, design);

  // Tabulated cost over the full grid; queries land exactly on the nodes.
  std::vector<double> gammas;
  gammas.reserve(report.points.size());
  for (const auto& pt : report.points) gammas.push_back(pt.implied_gamma);
  CostSpec implied{TabulatedCost(curve.z_grid, gammas)};

  RoundtripReport out;
  out.points.reserve(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto& pt = report.points[i];
    RoundtripPoint rp{};
    rp.z1 = pt.z1;
    rp.original_flag = curve.flags[i];
    rp.n2_original = curve.n2_cont[i];
    rp.certified = pt.certificate.certified();

    if (curve.flags[i] == BoundaryFlag::interior) {
      RulePoint re = optimize_n2(pt.z1, implied, design);
      rp.n2_recovered = re.n2;
      rp.checked = rp.certified;
      rp.pass = std::abs(re.n2 - rp.n2_original) <= tol_participants;
    } else {
      // At the bound value itself the boundary decision must be reproduced.
      RulePoint re = optimize_n2(pt.z1, ConstantCost{pt.implied_gamma}, design);
      rp.n2_recovered = re.n2;
      rp.checked = rp.certified;
      rp.pass = re.flag == curve.flags[i];
    }
    if (rp.checked) {
      ++out.n_checked;
      if (rp.pass) ++out.n_passed;
    }
    out.points.push_back(rp);
  }
  return out;
}

void write_audit_csv(const AuditReport& report, std::ostream& out) {
  csv::write_row(out, {"z1", "n2", "implied_gamma", "bound_kind", "concavity_status"});
  for (const auto& pt : report.points) {
    csv::write_row(out, {csv::format(pt.z1), csv::format(pt.n2),
                         csv::format(pt.implied_gamma), to_string(pt.kind),
                         to_string(pt.certificate.status)});
  }
}

}  // namespace ssr
