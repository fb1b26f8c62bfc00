#pragma once

// Brute-force reference computations. Written directly from the definitions
// with plain loops; none of them calls into the library's numerical code.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "tvd/image.hpp"

namespace tvd::oracle {

// Entry (j-2, k-2) holds f(j,k) - f(j,k-1) - f(j-1,k) + f(j-1,k-1).
inline Matrix delta(const Matrix& f) {
  Matrix d(f.rows() - 1, f.cols() - 1);
  for (Index j = 1; j < f.rows(); ++j)
    for (Index k = 1; k < f.cols(); ++k)
      d(j - 1, k - 1) = f(j, k) - f(j, k - 1) - f(j - 1, k) + f(j - 1, k - 1);
  return d;
}

inline double mean(const Matrix& f) {
  double s = 0.0;
  for (Index j = 0; j < f.rows(); ++j)
    for (Index k = 0; k < f.cols(); ++k) s += f(j, k);
  return s / static_cast<double>(f.rows() * f.cols());
}

inline Vector row_means(const Matrix& f) {
  Vector r = Vector::Zero(f.rows());
  for (Index j = 0; j < f.rows(); ++j) {
    for (Index k = 0; k < f.cols(); ++k) r(j) += f(j, k);
    r(j) /= static_cast<double>(f.cols());
  }
  return r;
}

inline Vector col_means(const Matrix& f) {
  Vector c = Vector::Zero(f.cols());
  for (Index k = 0; k < f.cols(); ++k) {
    for (Index j = 0; j < f.rows(); ++j) c(k) += f(j, k);
    c(k) /= static_cast<double>(f.rows());
  }
  return c;
}

// f(j,k) - f(j,o) - f(o,k) + f(o,o).
inline Matrix interactions(const Matrix& f) {
  const Vector r = row_means(f);
  const Vector c = col_means(f);
  const double m = mean(f);
  Matrix out(f.rows(), f.cols());
  for (Index j = 0; j < f.rows(); ++j)
    for (Index k = 0; k < f.cols(); ++k) out(j, k) = f(j, k) - r(j) - c(k) + m;
  return out;
}

inline Matrix atom(Index j0, Index k0, Index n1, Index n2) {
  Matrix a = Matrix::Zero(n1, n2);
  for (Index j = 1; j <= n1; ++j)
    for (Index k = 1; k <= n2; ++k) a(j - 1, k - 1) = (j >= j0 && k >= k0) ? 1.0 : 0.0;
  return a;
}

// Centered atom by explicit subtraction of the marginals of psi^{j,k}.
inline Matrix centered_atom(Index j0, Index k0, Index n1, Index n2) {
  const Matrix a = atom(j0, k0, n1, n2);
  if (j0 == 1 && k0 == 1) return a;
  if (j0 == 1 || k0 == 1) {
    Matrix c = a;
    c.array() -= mean(a);
    return c;
  }
  return interactions(a);
}

inline double frob_inner(const Matrix& a, const Matrix& b) {
  double s = 0.0;
  for (Index i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

// Square-in-square truth: ones on [n1/4+1, 3n1/4] x [n2/4+1, 3n2/4] (1-indexed).
inline Matrix truth(Index n1, Index n2) {
  Matrix f = Matrix::Zero(n1, n2);
  for (Index j = 1; j <= n1; ++j)
    for (Index k = 1; k <= n2; ++k)
      if (j >= n1 / 4 + 1 && j <= 3 * n1 / 4 && k >= n2 / 4 + 1 && k <= 3 * n2 / 4) f(j - 1, k - 1) = 1.0;
  return f;
}

// D1^T w D2 by scattering each entry of w onto its four pixels.
inline Matrix adjoint_delta(const Matrix& w) {
  Matrix f = Matrix::Zero(w.rows() + 1, w.cols() + 1);
  for (Index a = 0; a < w.rows(); ++a) {
    for (Index b = 0; b < w.cols(); ++b) {
      f(a + 1, b + 1) += w(a, b);
      f(a + 1, b) -= w(a, b);
      f(a, b + 1) -= w(a, b);
      f(a, b) += w(a, b);
    }
  }
  return f;
}

// ||z - P z||^2 for P the projection onto the column span of a, via an SVD
// least-squares solve.
inline double residual_sq(const Matrix& a, const Vector& z) {
  if (a.cols() == 0) return z.squaredNorm();
  const Vector coef = a.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(z);
  return (z - a * coef).squaredNorm();
}

// Columns are the vectorized atoms at the given (1-based) positions.
inline Matrix atom_columns(const std::vector<std::pair<Index, Index>>& pos, Index n1, Index n2, bool centered) {
  Matrix a(n1 * n2, static_cast<Index>(pos.size()));
  for (std::size_t m = 0; m < pos.size(); ++m) {
    const Matrix p = centered ? centered_atom(pos[m].first, pos[m].second, n1, n2)
                              : atom(pos[m].first, pos[m].second, n1, n2);
    a.col(static_cast<Index>(m)) = Eigen::Map<const Vector>(p.data(), p.size());
  }
  return a;
}

// Minimizer of ||y - b||^2/m + 2 lambda sum |b_i - b_{i-1}| through the dual
//   min_u 1/2 ||y - D^T u||^2  s.t. |u_i| <= m lambda,  b = y - D^T u,
// solved by projected gradient with step 1/4 (||D D^T|| <= 4).
inline Vector fused_lasso(const Vector& y, double lambda, int iterations = 400000) {
  const Index m = y.size();
  if (m == 1) return y;
  const double bound = lambda * static_cast<double>(m);
  std::vector<double> u(m - 1, 0.0);
  Vector b = y;
  for (int it = 0; it < iterations; ++it) {
    for (Index i = 0; i < m; ++i) {
      double dtu = 0.0;
      if (i < m - 1) dtu -= u[i];
      if (i > 0) dtu += u[i - 1];
      b(i) = y(i) - dtu;
    }
    // gradient of the dual objective wrt u_i is -(D b)_i = -(b_{i+1} - b_i)
    for (Index i = 0; i < m - 1; ++i) {
      u[i] = std::clamp(u[i] + 0.25 * (b(i + 1) - b(i)), -bound, bound);
    }
  }
  for (Index i = 0; i < m; ++i) {
    double dtu = 0.0;
    if (i < m - 1) dtu -= u[i];
    if (i > 0) dtu += u[i - 1];
    b(i) = y(i) - dtu;
  }
  return b;
}

}  // namespace tvd::oracle
