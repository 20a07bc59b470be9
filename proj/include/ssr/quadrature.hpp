#pragma once

#include <functional>
#include <span>
#include <vector>

namespace ssr {

/// Vector-valued integrand: fills out[0..dim) at the abscissa x.
using VectorIntegrand = std::function<void(double x, std::span<double> out)>;

struct QuadratureResult {
  std::vector<double> values;
  int levels = 0;        // panel doublings actually used
  bool converged = false;
  double last_delta = 0.0;  // max componentwise change at the final level
};

/// Composite 15-point Gauss-Legendre over [lo, hi] with panel doubling,
/// stopping when successive estimates agree componentwise to
/// tol_abs + tol_rel*|value|.
QuadratureResult integrate_panels(const VectorIntegrand& f, std::size_t dim,
                                  double lo, double hi, double tol_abs,
                                  double tol_rel, int max_levels);

/// Same but splits at the given interior breakpoints first, integrating each
/// smooth piece separately. Throws std::runtime_error with diagnostics when a
/// piece fails to converge within max_levels.
QuadratureResult integrate_piecewise(const VectorIntegrand& f, std::size_t dim,
                                     double lo, double hi,
                                     std::span<const double> breakpoints,
                                     double tol_abs, double tol_rel,
                                     int max_levels);

}  // namespace ssr
