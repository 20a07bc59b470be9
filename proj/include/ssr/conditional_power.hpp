#pragma once

#include <optional>

#include "ssr/design.hpp"

namespace ssr {

/// Result of the strict-concavity checks for CP(z1, .) on an n2 interval.
///
/// Two sufficient conditions are tested. The z-threshold condition certifies
/// concavity for every n2 in the interval whenever z1 strictly exceeds a
/// threshold that depends only on the design and the interval. The CP-bound
/// condition certifies it whenever the conditional power at the lower end of
/// the interval exceeds Phi(-1/(k*sqrt(n_hi - n1))). A certificate is
/// conservative: certified implies the curvature is negative everywhere on
/// the interval, but uncertified points may still be concave.
struct ConcavityCertificate {
  enum class Status { certified_by_cp_bound, certified_by_z_threshold, uncertified };
  Status status;
  double cp_bound;     // Phi(-1/(k*sqrt(n_hi - n1))), in (0, 0.5]
  double z_threshold;  // certify whenever z1 strictly exceeds this

  bool certified() const { return status != Status::uncertified; }
};

const char* to_string(ConcavityCertificate::Status s);

/// P(final combination test rejects | Z1 = z1, final total sample size n2),
/// under theta_alt. Requires n2 > n1; n2 is treated as real-valued.
double conditional_power(double z1, double n2, const DesignParams& design);

/// dCP/dn2, the marginal gain in power per additional participant.
double mgp(double z1, double n2, const DesignParams& design);

/// d2CP/dn2^2. Negative wherever CP is concave in n2.
double cp_curvature(double z1, double n2, const DesignParams& design);

ConcavityCertificate concavity_certificate(double z1, const DesignParams& design,
                                           double n_lo, double n_hi);

/// Smallest n2 with CP(z1, n2) = target_cp (closed form). Empty when the
/// target is below the n2 -> n1 limit of CP, i.e. unreachable.
std::optional<double> solve_n2_for_cp(double z1, double target_cp,
                                      const DesignParams& design);

/// The z1 with CP(z1, n2) = target_cp (closed form; CP is linear in z1
/// through the combination weights).
double solve_z1_for_cp(double n2, double target_cp, const DesignParams& design);

}  // namespace ssr
