#include "ssr/design.hpp"

#include <cmath>
#include <stdexcept>

#include "ssr/normal.hpp"

namespace ssr {

namespace {
constexpr double kMaxLogRatio = 700.0;  // exp(700) is still finite

void validate_core(const DesignParams& d) {
  if (!(d.sigma > 0.0)) throw std::invalid_argument("design: sigma must be > 0");
  if (!(d.theta_alt > 0.0))
    throw std::invalid_argument("design: theta_alt must be > 0");
  if (!(d.n1 > 0.0 && d.n1 < d.n_min && d.n_min <= d.n_max))
    throw std::invalid_argument("design: need 0 < n1 < n_min <= n_max");
  if (!(d.alpha > 0.0 && d.alpha < 0.5))
    throw std::invalid_argument("design: alpha must lie in (0, 0.5)");
  if (!(d.w1 > 0.0 && d.w2 > 0.0))
    throw std::invalid_argument("design: weights must be positive");
  if (std::abs(d.w1 * d.w1 + d.w2 * d.w2 - 1.0) > 1e-12)
    throw std::invalid_argument("design: w1^2 + w2^2 must equal 1");
}
}  // namespace

DesignParams::DesignParams(double sigma_, double theta_alt_, double n1_,
                           double n_min_, double n_max_, double alpha_,
                           double w1_, double w2_)
    : sigma(sigma_),
      theta_alt(theta_alt_),
      n1(n1_),
      n_min(n_min_),
      n_max(n_max_),
      alpha(alpha_),
      w1(w1_),
      w2(w2_),
      k(theta_alt_ / (2.0 * sigma_)),
      delta(0.0),
      c_crit(0.0) {
  validate_core(*this);
  delta = k * std::sqrt(n1);
  c_crit = norm_quantile(1.0 - alpha);
}

DesignParams::DesignParams(double sigma_, double theta_alt_, double n1_,
                           double n_min_, double n_max_, double alpha_)
    : DesignParams(sigma_, theta_alt_, n1_, n_min_, n_max_, alpha_,
                   std::sqrt(n1_ / n_min_), std::sqrt(1.0 - n1_ / n_min_)) {}

bool same_design(const DesignParams& a, const DesignParams& b, double tol) {
  auto close = [tol](double x, double y) { return std::abs(x - y) <= tol; };
  return close(a.sigma, b.sigma) && close(a.theta_alt, b.theta_alt) &&
         close(a.n1, b.n1) && close(a.n_min, b.n_min) &&
         close(a.n_max, b.n_max) && close(a.alpha, b.alpha) &&
         close(a.w1, b.w1) && close(a.w2, b.w2);
}

double interim_density(double z1, Hypothesis h, const DesignParams& design) {
  return h == Hypothesis::null ? norm_pdf(z1) : norm_pdf(z1 - design.delta);
}

double log_likelihood_ratio(double z1, const DesignParams& design) {
  if (!std::isfinite(z1))
    throw std::invalid_argument("log_likelihood_ratio: z1 must be finite");
  return 0.5 * design.delta * design.delta - z1 * design.delta;
}

double likelihood_ratio(double z1, const DesignParams& design, bool* clamped) {
  double lg = log_likelihood_ratio(z1, design);
  bool clip = std::abs(lg) > kMaxLogRatio;
  if (clamped) *clamped = clip;
  if (clip) lg = lg > 0.0 ? kMaxLogRatio : -kMaxLogRatio;
  return std::exp(lg);
}

}  // namespace ssr
