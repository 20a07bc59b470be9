#include "ssr/conditional_power.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ssr/normal.hpp"

namespace ssr {

namespace {
void require_n2(double n2, const DesignParams& d) {
  if (!(n2 > d.n1)) {
    throw std::invalid_argument("conditional power: n2 must exceed n1");
  }
}

// shifted argument of the combination rejection probability:
// CP = Phi(a_arg), a_arg = k*sqrt(n2-n1) - (c_crit - w1*z1)/w2
double a_arg(double z1, double n2, const DesignParams& d) {
  return d.k * std::sqrt(n2 - d.n1) - (d.c_crit - d.w1 * z1) / d.w2;
}

// h(m) = k*sqrt(m) + 1/(k*sqrt(m)); its minimum over [m_lo, m_hi] drives
// the z threshold (stationary point at m = 1/k^2 when inside the range).
double h_min_over(double m_lo, double m_hi, double k) {
  auto h = [k](double m) {
    double r = k * std::sqrt(m);
    return r + 1.0 / r;
  };
  double best = std::min(h(m_lo), h(m_hi));
  double m_star = 1.0 / (k * k);
  if (m_star > m_lo && m_star < m_hi) best = std::min(best, h(m_star));
  return best;
}
}  // namespace

const char* to_string(ConcavityCertificate::Status s) {
  switch (s) {
    case ConcavityCertificate::Status::certified_by_cp_bound:
      return "certified_by_cp_bound";
    case ConcavityCertificate::Status::certified_by_z_threshold:
      return "certified_by_z_threshold";
    default:
      return "uncertified";
  }
}

double conditional_power(double z1, double n2, const DesignParams& design) {
  require_n2(n2, design);
  return norm_cdf(a_arg(z1, n2, design));
}

double mgp(double z1, double n2, const DesignParams& design) {
  require_n2(n2, design);
  double m = n2 - design.n1;
  return norm_pdf(a_arg(z1, n2, design)) * design.k / (2.0 * std::sqrt(m));
}

double cp_curvature(double z1, double n2, const DesignParams& design) {
  require_n2(n2, design);
  double m = n2 - design.n1;
  double a = a_arg(z1, n2, design);
  double da = design.k / (2.0 * std::sqrt(m));
  double d2a = -0.25 * design.k * std::pow(m, -1.5);
  double pdf = norm_pdf(a);
  return -a * pdf * da * da + pdf * d2a;
}

ConcavityCertificate concavity_certificate(double z1, const DesignParams& design,
                                           double n_lo, double n_hi) {
  if (!(design.n1 < n_lo && n_lo <= n_hi)) {
    throw std::invalid_argument("concavity_certificate: need n1 < n_lo <= n_hi");
  }
  double m_lo = n_lo - design.n1;
  double m_hi = n_hi - design.n1;

  ConcavityCertificate cert{};
  cert.cp_bound = norm_cdf(-1.0 / (design.k * std::sqrt(m_hi)));
  cert.z_threshold =
      (design.c_crit - design.w2 * h_min_over(m_lo, m_hi, design.k)) / design.w1;

  if (z1 > cert.z_threshold) {
    cert.status = ConcavityCertificate::Status::certified_by_z_threshold;
  } else if (conditional_power(z1, n_lo, design) > cert.cp_bound) {
    // CP is increasing in n2, so the bound holds on the whole interval.
    cert.status = ConcavityCertificate::Status::certified_by_cp_bound;
  } else {
    cert.status = ConcavityCertificate::Status::uncertified;
  }
  return cert;
}

std::optional<double> solve_n2_for_cp(double z1, double target_cp,
                                      const DesignParams& design) {
  if (!(target_cp > 0.0 && target_cp < 1.0)) {
    throw std::invalid_argument("solve_n2_for_cp: target_cp must lie in (0,1)");
  }
  double s = norm_quantile(target_cp) + (design.c_crit - design.w1 * z1) / design.w2;
  if (!(s > 0.0)) return std::nullopt;  // CP exceeds the target already at n2 -> n1
  double root = s / design.k;
  return design.n1 + root * root;
}

double solve_z1_for_cp(double n2, double target_cp, const DesignParams& design) {
  if (!(target_cp > 0.0 && target_cp < 1.0)) {
    throw std::invalid_argument("solve_z1_for_cp: target_cp must lie in (0,1)");
  }
  require_n2(n2, design);
  double m = n2 - design.n1;
  return (design.c_crit -
          design.w2 * (design.k * std::sqrt(m) - norm_quantile(target_cp))) /
         design.w1;
}

}  // namespace ssr
