#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "ssr/design.hpp"

namespace ssr {

/// Fixed cost per participant, in conditional-power units.
struct ConstantCost {
  double gamma;
};

/// lambda2 + lambda1 * f0(z1)/f_theta(z1): spending is penalised exactly to
/// the extent that the interim data favour the null.
struct LikelihoodRatioCost {
  double lambda1;
  double lambda2;
};

/// Return-on-investment cost c/(V*p(z1)) with a two-point prior on the
/// effect. Only the ratio cost/value enters the computation.
struct RoiCost {
  double cost_per_participant;
  double success_value;
  double prior_null;  // pi0, mass on theta = 0
  double prior_alt;   // pi1, mass on theta = theta_alt
};

/// Cost tabulated on a strictly increasing z1 grid, interpolated linearly in
/// (z1, log gamma). Queries are clamped to the end values within one grid
/// spacing of the ends and rejected beyond that.
class TabulatedCost {
 public:
  TabulatedCost(std::vector<double> z, std::vector<double> gamma);

  double eval(double z1) const;
  const std::vector<double>& grid() const { return z_; }
  double gamma_at(std::size_t i) const;

 private:
  std::vector<double> z_;
  std::vector<double> log_gamma_;
};

using CostSpec =
    std::variant<ConstantCost, LikelihoodRatioCost, RoiCost, TabulatedCost>;

/// Per-participant cost gamma(z1) of the given spec. Validates the spec's
/// parameter invariants on every call (cheap for the closed-form variants).
double gamma_eval(const CostSpec& cost, double z1, const DesignParams& design);

/// Posterior probability that the treatment is effective, under the
/// two-point prior (pi0 on theta = 0, pi1 on theta = theta_alt).
double posterior_effective(double z1, double pi0, double pi1,
                           const DesignParams& design);

/// Loads a two-column CSV (z1, gamma) with a header row.
TabulatedCost tabulated_from_csv(std::istream& in);
TabulatedCost tabulated_from_csv_file(const std::string& path);

std::string cost_params_text(const CostSpec& cost);

}  // namespace ssr
