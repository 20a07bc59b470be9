#include "ssr/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ssr {

namespace {
struct NodeWeight {
  double x, w;
};

// 15-point Gauss-Legendre on [-1, 1].
constexpr NodeWeight kGl15[] = {
    {-0.98799251802048538, 0.030753241996118647},
    {-0.93727339240070595, 0.070366047488108069},
    {-0.84820658341042721, 0.10715922046717177},
    {-0.72441773136017007, 0.13957067792615391},
    {-0.57097217260853883, 0.16626920581699378},
    {-0.39415134707756339, 0.18616100001556188},
    {-0.20119409399743451, 0.19843148532711125},
    {0.0, 0.2025782419255609},
    {0.20119409399743451, 0.19843148532711125},
    {0.39415134707756339, 0.18616100001556188},
    {0.57097217260853883, 0.16626920581699378},
    {0.72441773136017007, 0.13957067792615391},
    {0.84820658341042721, 0.10715922046717177},
    {0.93727339240070595, 0.070366047488108069},
    {0.98799251802048538, 0.030753241996118647},
};

void accumulate_panels(const VectorIntegrand& f, std::size_t dim, double lo,
                       double hi, int panels, std::vector<double>& out) {
  std::fill(out.begin(), out.end(), 0.0);
  std::vector<double> val(dim);
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    const double half = 0.5 * h;
    for (const auto& nw : kGl15) {
      f(mid + half * nw.x, val);
      for (std::size_t j = 0; j < dim; ++j) out[j] += half * nw.w * val[j];
    }
  }
}
}  // namespace

QuadratureResult integrate_panels(const VectorIntegrand& f, std::size_t dim,
                                  double lo, double hi, double tol_abs,
                                  double tol_rel, int max_levels) {
  QuadratureResult res;
  res.values.assign(dim, 0.0);
  if (hi <= lo) {
    res.converged = true;
    return res;
  }
  std::vector<double> prev(dim), cur(dim);
  int panels = 4;
  accumulate_panels(f, dim, lo, hi, panels, prev);
  for (int level = 1; level <= max_levels; ++level) {
    panels *= 2;
    accumulate_panels(f, dim, lo, hi, panels, cur);
    double delta = 0.0;
    bool ok = true;
    for (std::size_t j = 0; j < dim; ++j) {
      double dj = std::abs(cur[j] - prev[j]);
      delta = std::max(delta, dj);
      if (dj > tol_abs + tol_rel * std::abs(cur[j])) ok = false;
    }
    res.levels = level;
    res.last_delta = delta;
    if (ok) {
      res.values = cur;
      res.converged = true;
      return res;
    }
    prev = cur;
  }
  res.values = prev;
  res.converged = false;
  return res;
}

QuadratureResult integrate_piecewise(const VectorIntegrand& f, std::size_t dim,
                                     double lo, double hi,
                                     std::span<const double> breakpoints,
                                     double tol_abs, double tol_rel,
                                     int max_levels) {
  std::vector<double> edges{lo};
  for (double b : breakpoints) {
    if (b > lo && b < hi) edges.push_back(b);
  }
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());

  QuadratureResult total;
  total.values.assign(dim, 0.0);
  total.converged = true;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    auto piece = integrate_panels(f, dim, edges[i], edges[i + 1], tol_abs,
                                  tol_rel, max_levels);
    if (!piece.converged) {
      std::ostringstream os;
      os << "quadrature failed to converge on [" << edges[i] << ", "
         << edges[i + 1] << "] after " << max_levels
         << " refinement levels (last delta " << piece.last_delta << ")";
      throw std::runtime_error(os.str());
    }
    for (std::size_t j = 0; j < dim; ++j) total.values[j] += piece.values[j];
    total.levels = std::max(total.levels, piece.levels);
    total.last_delta = std::max(total.last_delta, piece.last_delta);
  }
  return total;
}

}  // namespace ssr
