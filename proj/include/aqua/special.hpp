#pragma once

namespace aqua {

// Standard normal quantile (Wichura's rational approximations, accurate to
// about 1e-15 over (0,1)).  Throws std::domain_error outside (0,1).
double normal_quantile(double p);

// Standard normal CDF.
double normal_cdf(double x);

// log Beta(a, b), a,b > 0.
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a,b) for x in [0,1], a,b > 0.
double beta_cdf(double a, double b, double x);

// Beta density at x (0 at the open endpoints for a,b >= 1; +inf endpoints are
// never evaluated because callers stay strictly inside (0,1)).
double beta_pdf(double a, double b, double x);

// Inverse of beta_cdf in p.  Safeguarded Newton on a maintained bracket;
// accurate to a few ulps of x for moderate p and monotone in p throughout.
double beta_quantile(double a, double b, double p);

}  // namespace aqua
