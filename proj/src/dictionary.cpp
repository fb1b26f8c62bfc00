#include "tvd/dictionary.hpp"

#include <algorithm>
#include <string>

namespace tvd {

namespace {

void require_index(AtomIndex idx, Index n1, Index n2) {
  if (n1 < 1 || n2 < 1) throw DimensionError("atom grid must be non-empty");
  if (idx.j < 1 || idx.j > n1 || idx.k < 1 || idx.k > n2) {
    throw DomainError("atom index (" + std::to_string(idx.j) + "," + std::to_string(idx.k) +
                      ") outside [1:" + std::to_string(n1) + "]x[1:" + std::to_string(n2) + "]");
  }
}

// <u_j, u_j'> - <u_j,1><u_j',1>/n for half-interval indicators u of length n.
double centered_overlap(Index j, Index jp, Index n) {
  const double overlap = static_cast<double>(n - std::max(j, jp) + 1);
  const double a = static_cast<double>(n - j + 1);
  const double b = static_cast<double>(n - jp + 1);
  return overlap - a * b / static_cast<double>(n);
}

// Inner product of the one-dimensional factors of two centered atoms along an
// axis of length n: the factor is the constant vector for index 1 and the
// centered half-interval indicator otherwise.
double centered_factor_inner(Index j, Index jp, Index n) {
  if (j == 1 && jp == 1) return static_cast<double>(n);
  if (j == 1 || jp == 1) return 0.0;
  return centered_overlap(j, jp, n);
}

Vector centered_indicator(Index j, Index n) {
  Vector u = Vector::Zero(n);
  u.tail(n - j + 1).setOnes();
  u.array() -= atom_mean_1d(j, n);
  return u;
}

}  // namespace

Image atom(AtomIndex idx, Index n1, Index n2) {
  require_index(idx, n1, n2);
  Matrix m = Matrix::Zero(n1, n2);
  m.bottomRightCorner(n1 - idx.j + 1, n2 - idx.k + 1).setOnes();
  return Image(std::move(m));
}

Image centered_atom(AtomIndex idx, Index n1, Index n2) {
  require_index(idx, n1, n2);
  const Vector row = idx.j == 1 ? Vector(Vector::Ones(n1)) : centered_indicator(idx.j, n1);
  const Vector col = idx.k == 1 ? Vector(Vector::Ones(n2)) : centered_indicator(idx.k, n2);
  return Image(Matrix(row * col.transpose()));
}

CoefficientField::CoefficientField(Index n1, Index n2) : values_(Matrix::Zero(n1, n2)) {}

CoefficientField::CoefficientField(Matrix values) : values_(std::move(values)) {}

DerivativeField CoefficientField::interaction_block() const {
  if (rows() < 2 || cols() < 2) throw DimensionError("coefficient field has no interaction block");
  return DerivativeField(Matrix(values_.bottomRightCorner(rows() - 1, cols() - 1)));
}

void CoefficientField::set_interaction_block(const DerivativeField& block) {
  if (block.image_rows() != rows() || block.image_cols() != cols()) {
    throw DimensionError("interaction block shape mismatch");
  }
  values_.bottomRightCorner(rows() - 1, cols() - 1) = block.matrix();
}

CoefficientField expansion_coefficients(const Image& f) {
  const AnovaParts parts = anova_decompose(f);
  const Index n1 = f.rows();
  const Index n2 = f.cols();
  CoefficientField c(n1, n2);
  c(1, 1) = parts.global_mean;
  for (Index j = 2; j <= n1; ++j) c(j, 1) = parts.row_effects(j - 1) - parts.row_effects(j - 2);
  for (Index k = 2; k <= n2; ++k) c(1, k) = parts.col_effects(k - 1) - parts.col_effects(k - 2);
  if (n1 >= 2 && n2 >= 2) c.set_interaction_block(total_derivative(f));
  return c;
}

Image synthesize(const CoefficientField& c) {
  const Index n1 = c.rows();
  const Index n2 = c.cols();
  if (n1 < 1 || n2 < 1) throw DimensionError("empty coefficient field");
  const Matrix& b = c.matrix();

  // First column: sum_j beta_{j,1} (C u_j), a prefix sum then centering.
  Vector rows = Vector::Zero(n1);
  for (Index i = 1; i < n1; ++i) rows(i) = rows(i - 1) + b(i, 0);
  rows.array() -= rows.mean();
  Vector cols = Vector::Zero(n2);
  for (Index i = 1; i < n2; ++i) cols(i) = cols(i - 1) + b(0, i);
  cols.array() -= cols.mean();

  Matrix out = Matrix::Constant(n1, n2, b(0, 0));
  out.colwise() += rows;
  out.rowwise() += cols.transpose();
  if (n1 >= 2 && n2 >= 2) out += synthesize_interactions(c.interaction_block()).matrix();
  return Image(std::move(out));
}

Image synthesize_interactions(const DerivativeField& beta) {
  const Index n1 = beta.image_rows();
  const Index n2 = beta.image_cols();
  // P(a,b) = sum_{j<=a, k<=b} beta_{j,k}: uncentered synthesis with psi^{j,k}.
  Matrix p = Matrix::Zero(n1, n2);
  const Matrix& bm = beta.matrix();
  for (Index a = 1; a < n1; ++a) {
    for (Index b = 1; b < n2; ++b) {
      p(a, b) = bm(a - 1, b - 1) + p(a - 1, b) + p(a, b - 1) - p(a - 1, b - 1);
    }
  }
  return Image(double_center(p));
}

DerivativeField interaction_correlations(const Image& r) {
  const Matrix rc = double_center(r.matrix());
  const Index n1 = rc.rows();
  const Index n2 = rc.cols();
  if (n1 < 2 || n2 < 2) throw DimensionError("interaction_correlations needs a 2x2 image");
  // Suffix sums S(a,b) = sum_{a'>=a, b'>=b} rc(a',b').
  Matrix s = Matrix::Zero(n1 + 1, n2 + 1);
  for (Index a = n1 - 1; a >= 0; --a) {
    for (Index b = n2 - 1; b >= 0; --b) {
      s(a, b) = rc(a, b) + s(a + 1, b) + s(a, b + 1) - s(a + 1, b + 1);
    }
  }
  return DerivativeField(Matrix(s.block(1, 1, n1 - 1, n2 - 1)));
}

double atom_inner_product(AtomIndex a, AtomIndex b, bool centered, Index n1, Index n2) {
  require_index(a, n1, n2);
  require_index(b, n1, n2);
  if (!centered) {
    return static_cast<double>(n1 - std::max(a.j, b.j) + 1) *
           static_cast<double>(n2 - std::max(a.k, b.k) + 1);
  }
  return centered_factor_inner(a.j, b.j, n1) * centered_factor_inner(a.k, b.k, n2);
}

InteractionGram::InteractionGram(Index n1, Index n2) : n1_(n1), n2_(n2) {
  if (n1 < 2 || n2 < 2) throw DimensionError("interaction Gram needs n1, n2 >= 2");
  row_gram_.resize(n1 - 1, n1 - 1);
  for (Index a = 0; a < n1 - 1; ++a)
    for (Index b = 0; b < n1 - 1; ++b) row_gram_(a, b) = centered_overlap(a + 2, b + 2, n1);
  col_gram_.resize(n2 - 1, n2 - 1);
  for (Index a = 0; a < n2 - 1; ++a)
    for (Index b = 0; b < n2 - 1; ++b) col_gram_(a, b) = centered_overlap(a + 2, b + 2, n2);
}

}  // namespace tvd
