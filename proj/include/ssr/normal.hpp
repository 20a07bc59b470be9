#pragma once

namespace ssr {

/// Standard normal density. Rejects non-finite input.
double norm_pdf(double x);

/// Standard normal distribution function, accurate to well below 1e-10.
/// Rejects non-finite input.
double norm_cdf(double x);

/// Inverse of norm_cdf for p in (0,1). Rational initial guess refined by
/// one Newton step; round-trips through norm_cdf to better than 1e-9.
double norm_quantile(double p);

}  // namespace ssr
