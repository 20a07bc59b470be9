#include "ssr/cost.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "ssr/csv.hpp"

namespace ssr {

namespace {
void validate(const ConstantCost& c) {
  if (!(c.gamma > 0.0)) throw std::invalid_argument("constant cost: gamma must be > 0");
}

void validate(const LikelihoodRatioCost& c) {
  if (!(c.lambda1 >= 0.0 && c.lambda2 >= 0.0))
    throw std::invalid_argument("likelihood-ratio cost: lambdas must be >= 0");
  if (c.lambda1 == 0.0 && c.lambda2 == 0.0)
    throw std::invalid_argument("likelihood-ratio cost: lambdas must not both be 0");
}

void validate(const RoiCost& c) {
  if (!(c.cost_per_participant > 0.0))
    throw std::invalid_argument("roi cost: cost_per_participant must be > 0");
  if (!(c.success_value > 0.0))
    throw std::invalid_argument("roi cost: success_value must be > 0");
  if (!(c.prior_null > 0.0 && c.prior_alt > 0.0))
    throw std::invalid_argument("roi cost: priors must be > 0");
  if (std::abs(c.prior_null + c.prior_alt - 1.0) > 1e-12)
    throw std::invalid_argument("roi cost: priors must sum to 1");
}

double finite_or_cap(double g) {
  return std::isfinite(g) ? g : 1e300;
}
}  // namespace

TabulatedCost::TabulatedCost(std::vector<double> z, std::vector<double> gamma)
    : z_(std::move(z)) {
  if (z_.size() < 2 || z_.size() != gamma.size())
    throw std::invalid_argument("tabulated cost: need matching grids of size >= 2");
  for (std::size_t i = 0; i + 1 < z_.size(); ++i) {
    if (!(z_[i] < z_[i + 1]))
      throw std::invalid_argument("tabulated cost: z grid must be strictly increasing");
  }
  log_gamma_.reserve(gamma.size());
  for (double g : gamma) {
    if (!(g > 0.0) || !std::isfinite(g))
      throw std::invalid_argument("tabulated cost: gamma values must be positive and finite");
    log_gamma_.push_back(std::log(g));
  }
}

double TabulatedCost::gamma_at(std::size_t i) const {
  return std::exp(log_gamma_.at(i));
}

double TabulatedCost::eval(double z1) const {
  const double lo = z_.front(), hi = z_.back();
  if (z1 < lo) {
    if (lo - z1 > z_[1] - lo)
      throw std::invalid_argument("tabulated cost: query below grid by more than one spacing");
    return std::exp(log_gamma_.front());
  }
  if (z1 > hi) {
    if (z1 - hi > hi - z_[z_.size() - 2])
      throw std::invalid_argument("tabulated cost: query above grid by more than one spacing");
    return std::exp(log_gamma_.back());
  }
  auto it = std::lower_bound(z_.begin(), z_.end(), z1);
  std::size_t j = static_cast<std::size_t>(it - z_.begin());
  if (j == 0) return std::exp(log_gamma_.front());
  double t = (z1 - z_[j - 1]) / (z_[j] - z_[j - 1]);
  return std::exp((1.0 - t) * log_gamma_[j - 1] + t * log_gamma_[j]);
}

double gamma_eval(const CostSpec& cost, double z1, const DesignParams& design) {
  return std::visit(
      [&](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ConstantCost>) {
          validate(c);
          return c.gamma;
        } else if constexpr (std::is_same_v<T, LikelihoodRatioCost>) {
          validate(c);
          return finite_or_cap(c.lambda2 + c.lambda1 * likelihood_ratio(z1, design));
        } else if constexpr (std::is_same_v<T, RoiCost>) {
          validate(c);
          double ratio = c.cost_per_participant / c.success_value;
          return finite_or_cap(
              ratio * (1.0 + c.prior_null / c.prior_alt * likelihood_ratio(z1, design)));
        } else {
          return c.eval(z1);
        }
      },
      cost);
}

double posterior_effective(double z1, double pi0, double pi1,
                           const DesignParams& design) {
  if (!(pi0 > 0.0 && pi1 > 0.0) || std::abs(pi0 + pi1 - 1.0) > 1e-12)
    throw std::invalid_argument("posterior_effective: invalid priors");
  double lg = log_likelihood_ratio(z1, design) + std::log(pi0 / pi1);
  if (lg > 700.0) lg = 700.0;
  return 1.0 / (1.0 + std::exp(lg));
}

TabulatedCost tabulated_from_csv(std::istream& in) {
  auto rows = csv::read(in);
  if (rows.empty()) throw std::invalid_argument("tabulated cost csv: missing header row");
  std::vector<double> z, g;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 2)
      throw std::invalid_argument("tabulated cost csv: expected two columns");
    z.push_back(csv::to_double(rows[i][0]));
    g.push_back(csv::to_double(rows[i][1]));
  }
  return TabulatedCost(std::move(z), std::move(g));
}

TabulatedCost tabulated_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("tabulated cost csv: cannot open " + path);
  return tabulated_from_csv(in);
}

std::string cost_params_text(const CostSpec& cost) {
  std::ostringstream os;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ConstantCost>) {
          os << "gamma=" << c.gamma;
        } else if constexpr (std::is_same_v<T, LikelihoodRatioCost>) {
          os << "lambda1=" << c.lambda1 << " lambda2=" << c.lambda2;
        } else if constexpr (std::is_same_v<T, RoiCost>) {
          os << "c=" << c.cost_per_participant << " V=" << c.success_value
             << " pi0=" << c.prior_null << " pi1=" << c.prior_alt;
        } else {
          os << "points=" << c.grid().size();
        }
      },
      cost);
  return os.str();
}

}  // namespace ssr
