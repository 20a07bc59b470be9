#pragma once

#include <optional>

namespace ssr {

enum class Hypothesis { null, alternative };

/// Two-stage design with a normally distributed endpoint, known common
/// variance and 1:1 allocation. Sample sizes are totals over both arms.
/// The final test is a weighted inverse normal combination of the interim
/// statistic and the independent second-stage increment; the weights are
/// frozen at design time, which is what keeps the type I error exact under
/// data-dependent sample size changes.
struct DesignParams {
  double sigma;      // endpoint standard deviation
  double theta_alt;  // treatment effect the design is powered for
  double n1;         // interim total sample size
  double n_min;      // minimum final total sample size
  double n_max;      // maximum final total sample size
  double alpha;      // one-sided significance level
  double w1, w2;     // inverse normal combination weights, w1^2 + w2^2 = 1

  // derived at construction
  double k;       // theta_alt / (2 sigma)
  double delta;   // drift of the interim statistic under theta_alt, k*sqrt(n1)
  double c_crit;  // rejection threshold for the combination statistic

  /// Default weights: w1 = sqrt(n1/n_min), w2 = sqrt(1 - n1/n_min).
  DesignParams(double sigma, double theta_alt, double n1, double n_min,
               double n_max, double alpha);

  DesignParams(double sigma, double theta_alt, double n1, double n_min,
               double n_max, double alpha, double w1, double w2);
};

/// True if the two designs agree field-by-field to within tol.
bool same_design(const DesignParams& a, const DesignParams& b,
                 double tol = 1e-9);

/// Density of the interim statistic Z1 under the given hypothesis:
/// standard normal under the null, shifted by delta under the alternative.
double interim_density(double z1, Hypothesis h, const DesignParams& design);

/// log of f0(z1)/f_theta(z1) = delta^2/2 - z1*delta. Exact, never overflows.
double log_likelihood_ratio(double z1, const DesignParams& design);

/// f0(z1)/f_theta(z1), computed in log space. For extreme z1 the result is
/// clamped to a finite value; *clamped (when non-null) reports whether the
/// clamp was hit.
double likelihood_ratio(double z1, const DesignParams& design,
                        bool* clamped = nullptr);

}  // namespace ssr
