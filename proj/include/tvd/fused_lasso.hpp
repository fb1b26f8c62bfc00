#pragma once

#include "tvd/image.hpp"

namespace tvd {

// Converts the per-vector objective  ||y - b||^2 / m + 2 lambda sum |b_i - b_{i-1}|
// into the weight mu of the standard form  1/2 ||y - b||^2 + mu sum |b_i - b_{i-1}|.
//
// Main effects need no further rescaling: a row-effect image b 1^T has
// ||Y(.,o) - b 1^T||^2 / n = ||y_r - b||^2 / n1, so the row problem is exactly
// the per-vector problem with m = n1 and lambda = lambda1 (columns likewise).
// Every lambda conversion in the library goes through this function.
inline double fused_lasso_weight(double lambda, Index length) {
  return lambda * static_cast<double>(length);
}

// Exact minimizer of ||y - b||^2 / m + 2 lambda sum_i |b_i - b_{i-1}| by the
// O(m) dynamic program over piecewise-linear derivatives of the partial
// objectives. Throws DomainError for negative lambda.
Vector fused_lasso_1d(const Vector& y, double lambda);

// Smallest lambda at which the solution collapses to the constant mean(y):
// max_i |sum_{l<=i} (y_l - mean y)| / m.
double fused_lasso_saturation(const Vector& y);

double fused_lasso_objective(const Vector& y, const Vector& b, double lambda);

}  // namespace tvd
