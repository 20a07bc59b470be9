#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ssr/conditional_power.hpp"
#include "ssr/design.hpp"
#include "ssr/rule.hpp"

namespace ssr {

/// How a per-point implied cost value is to be read. Interior points pin the
/// cost exactly (gamma* = dCP/dn2 at the chosen size); at the bounds only an
/// inequality survives: any cost >= mgp(z1, n_min) rationalises staying at
/// the minimum, any cost <= mgp(z1, n_max) rationalises the cap.
enum class BoundKind { exact, upper_bound_at_min, lower_bound_at_max };

const char* to_string(BoundKind k);

struct AuditPoint {
  double z1;
  double n2;
  double implied_gamma;  // exact value or the bound value
  BoundKind kind;
  ConcavityCertificate certificate;
};

struct AuditAnomaly {
  std::size_t first;  // grid index range [first, last]
  std::size_t last;
  std::string reason;
};

struct AuditReport {
  std::vector<AuditPoint> points;
  std::vector<AuditAnomaly> anomalies;
  DesignParams design;
  std::string family;
};

/// Extracts the implied dynamic cost of a tabulated rule. Uses the
/// continuous n2 column; integer rounding would put +-0.5 participants of
/// noise into the derivative. Uncertified points still get a gamma* value
/// but uniqueness is not claimed for them.
AuditReport implied_cost(const RuleCurve& curve, const DesignParams& design);

/// Flags irrational cost structure:
///  - increasing_cost: gamma* rising with z1 across certified interior points
///  - cost_jump: gamma* changing by more than 10x between adjacent points
///  - rule_jump: adjacent at_min/at_max points, i.e. a sample-size jump whose
///    two sides demand incompatible costs
///  - uncertified_interior: interior spending where concavity is uncertified
std::vector<AuditAnomaly> audit_flags(const AuditReport& report);

struct RoundtripPoint {
  double z1;
  BoundaryFlag original_flag;
  double n2_original;
  double n2_recovered;
  bool certified;
  bool checked;  // boundary points verify flag reproduction instead of n2
  bool pass;
};

struct RoundtripReport {
  std::vector<RoundtripPoint> points;
  std::size_t n_checked = 0;
  std::size_t n_passed = 0;
  bool all_passed() const { return n_checked == n_passed; }
};

/// Re-optimises against the implied cost and checks that certified interior
/// points recover their n2 within tol_participants and that boundary points
/// stay on their boundary at the bound value itself. Uncertified points are
/// reported but excluded from pass/fail.
RoundtripReport roundtrip_check(const RuleCurve& curve, const DesignParams& design,
                                double tol_participants);

void write_audit_csv(const AuditReport& report, std::ostream& out);

}  // namespace ssr
