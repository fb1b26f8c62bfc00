#pragma once

#include "tvd/image.hpp"

namespace tvd {

// (Delta f)_{j,k} = f(j,k) - f(j,k-1) - f(j-1,k) + f(j-1,k-1) on [2:n1] x [2:n2],
// i.e. D1 f D2^T with D the forward-difference matrices.
DerivativeField total_derivative(const Image& f);

// D1^T w D2, the adjoint of total_derivative. Returns an n1 x n2 image for a
// field over [2:n1] x [2:n2].
Image adjoint_derivative(const DerivativeField& w);

// Right-hand side of two-dimensional summation by parts:
//   sum_{j=2}^{n1-1} sum_{k=2}^{n2-1} (Delta w)_{j+1,k+1} f(j,k).
// Equals <w, Delta f> whenever w vanishes on the boundary of [2:n1] x [2:n2].
double partial_integration_sum(const DerivativeField& w, const Image& f);

double tv(const Image& f);
double tv1(const Image& f);
double tv2(const Image& f);

// Four mutually orthogonal components of an image: global mean, centered row
// effects f(j,o), centered column effects f(o,k) and the doubly centered
// interaction terms.
struct AnovaParts {
  double global_mean = 0.0;
  Vector row_effects;  // length n1, sums to zero
  Vector col_effects;  // length n2, sums to zero
  Image interactions;

  Index rows() const { return row_effects.size(); }
  Index cols() const { return col_effects.size(); }

  // Each component as an n1 x n2 image.
  Image mean_image() const;
  Image row_image() const;
  Image col_image() const;
};

AnovaParts anova_decompose(const Image& f);
Image anova_recompose(const AnovaParts& parts);

// Interaction part only; cheaper than a full decomposition.
Image interaction_part(const Image& f);
Matrix double_center(const Matrix& m);

// Largest absolute row or column sum.
double centering_defect(const Image& f);

}  // namespace tvd
