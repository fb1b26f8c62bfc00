#include "tvd/fused_lasso.hpp"

#include <cmath>
#include <vector>

namespace tvd {

namespace {

// Minimizes 1/2 ||y - b||^2 + mu sum |b_{i+1} - b_i|. Forward pass keeps the
// derivative of the partial objective as a piecewise-linear function stored as
// knots x[l..r] with slope/intercept increments (a, b); the backward pass
// clips against the recorded knots tm/tp.
Vector dp_solve(const Vector& y, double mu) {
  const Index n = y.size();
  Vector beta(n);
  if (n == 1 || mu == 0.0) return y;

  std::vector<double> x(2 * n), a(2 * n), b(2 * n), tm(n - 1), tp(n - 1);

  tm[0] = -mu + y(0);
  tp[0] = mu + y(0);
  Index l = n - 1;
  Index r = n;
  x[l] = tm[0];
  x[r] = tp[0];
  a[l] = 1.0;
  b[l] = -y(0) + mu;
  a[r] = -1.0;
  b[r] = y(0) + mu;
  double afirst = 1.0;
  double bfirst = -mu - y(1);
  double alast = -1.0;
  double blast = -mu + y(1);

  for (Index k = 1; k < n - 1; ++k) {
    double alo = afirst;
    double blo = bfirst;
    Index lo = l;
    for (; lo <= r; ++lo) {
      if (alo * x[lo] + blo > -mu) break;
      alo += a[lo];
      blo += b[lo];
    }
    tm[k] = (-mu - blo) / alo;
    l = lo - 1;
    x[l] = tm[k];

    double ahi = alast;
    double bhi = blast;
    Index hi = r;
    for (; hi >= l; --hi) {
      if (-ahi * x[hi] - bhi < mu) break;
      ahi += a[hi];
      bhi += b[hi];
    }
    tp[k] = (mu + bhi) / (-ahi);
    r = hi + 1;
    x[r] = tp[k];

    a[l] = alo;
    b[l] = blo + mu;
    a[r] = ahi;
    b[r] = bhi + mu;
    afirst = 1.0;
    bfirst = -mu - y(k + 1);
    alast = -1.0;
    blast = -mu + y(k + 1);
  }

  double alo = afirst;
  double blo = bfirst;
  for (Index lo = l; lo <= r; ++lo) {
    if (alo * x[lo] + blo > 0.0) break;
    alo += a[lo];
    blo += b[lo];
  }
  beta(n - 1) = -blo / alo;

  for (Index k = n - 2; k >= 0; --k) {
    if (beta(k + 1) > tp[k]) {
      beta(k) = tp[k];
    } else if (beta(k + 1) < tm[k]) {
      beta(k) = tm[k];
    } else {
      beta(k) = beta(k + 1);
    }
  }
  return beta;
}

}  // namespace

Vector fused_lasso_1d(const Vector& y, double lambda) {
  if (!(lambda >= 0.0)) throw DomainError("fused lasso: lambda must be non-negative");
  if (y.size() < 1) throw DimensionError("fused lasso: empty input");
  return dp_solve(y, fused_lasso_weight(lambda, y.size()));
}

double fused_lasso_saturation(const Vector& y) {
  if (y.size() < 1) throw DimensionError("fused lasso: empty input");
  const double mean = y.mean();
  double partial = 0.0;
  double worst = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    partial += y(i) - mean;
    worst = std::max(worst, std::abs(partial));
  }
  return worst / static_cast<double>(y.size());
}

double fused_lasso_objective(const Vector& y, const Vector& b, double lambda) {
  double tv = 0.0;
  for (Index i = 1; i < b.size(); ++i) tv += std::abs(b(i) - b(i - 1));
  return (y - b).squaredNorm() / static_cast<double>(y.size()) + 2.0 * lambda * tv;
}

}  // namespace tvd
