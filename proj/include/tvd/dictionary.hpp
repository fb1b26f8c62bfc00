#pragma once

#include "tvd/core.hpp"
#include "tvd/image.hpp"

namespace tvd {

// Index (j, k) in [1:n1] x [1:n2] of a half-interval atom psi^{j,k}, the
// indicator of the South-East quadrant {rows >= j, cols >= k}.
struct AtomIndex {
  Index j = 1;
  Index k = 1;

  bool operator==(const AtomIndex&) const = default;
  auto operator<=>(const AtomIndex&) const = default;
};

// Grids up to this many pixels may materialize atoms densely; solvers never do.
inline constexpr Index kDenseAtomPixelLimit = 64 * 64;

Image atom(AtomIndex idx, Index n1, Index n2);

// psi~^{j,k}: psi^{1,1} for (1,1); mean-centered for the first row and column;
// doubly centered for the interaction block [2:n1] x [2:n2].
Image centered_atom(AtomIndex idx, Index n1, Index n2);

// Mean of psi^{j,1}, i.e. 1 - (j-1)/n1 (same form for columns).
inline double atom_mean_1d(Index j, Index n) {
  return 1.0 - static_cast<double>(j - 1) / static_cast<double>(n);
}

// Coefficients of an image in the centered dictionary, laid out n1 x n2:
// (1,1) holds the global mean, the first column holds successive differences
// of the row effects, the first row those of the column effects, and the block
// [2:n1] x [2:n2] holds Delta f.
class CoefficientField {
 public:
  CoefficientField() = default;
  CoefficientField(Index n1, Index n2);
  explicit CoefficientField(Matrix values);

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

  double operator()(Index j, Index k) const { return values_(j - 1, k - 1); }
  double& operator()(Index j, Index k) { return values_(j - 1, k - 1); }

  const Matrix& matrix() const { return values_; }
  Matrix& matrix() { return values_; }

  // The interaction block as a field over [2:n1] x [2:n2].
  DerivativeField interaction_block() const;
  void set_interaction_block(const DerivativeField& block);

 private:
  Matrix values_;
};

CoefficientField expansion_coefficients(const Image& f);
Image synthesize(const CoefficientField& c);

// sum_{(j,k) in [2:n1]x[2:n2]} beta_{j,k} psi~^{j,k}; O(n1 n2) via prefix sums.
Image synthesize_interactions(const DerivativeField& beta);

// <psi~^{j,k}, r> for every interaction index, returned in derivative-field
// layout. Equals the South-East quadrant sums of the doubly centered r.
DerivativeField interaction_correlations(const Image& r);

// Closed-form <psi^a, psi^b> (centered = false) or <psi~^a, psi~^b>
// (centered = true). O(1); atoms are never materialized.
double atom_inner_product(AtomIndex a, AtomIndex b, bool centered, Index n1, Index n2);

// Gram entries of the interaction block of the centered dictionary. Each
// centered atom factors as (C u_j)(C v_k)^T, so the Gram matrix is the Kronecker
// product of two small one-dimensional Gram matrices, which are cached.
class InteractionGram {
 public:
  InteractionGram(Index n1, Index n2);

  double operator()(AtomIndex a, AtomIndex b) const {
    return row_gram_(a.j - 2, b.j - 2) * col_gram_(a.k - 2, b.k - 2);
  }
  double diagonal(AtomIndex a) const { return (*this)(a, a); }

  Index n1() const { return n1_; }
  Index n2() const { return n2_; }

 private:
  Index n1_;
  Index n2_;
  Matrix row_gram_;  // (n1-1) x (n1-1), entries <C u_j, C u_j'>
  Matrix col_gram_;
};

}  // namespace tvd
