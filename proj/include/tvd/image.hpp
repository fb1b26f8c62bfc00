#pragma once

#include <Eigen/Dense>

#include <cstddef>

#include "tvd/errors.hpp"

namespace tvd {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// An n1 x n2 real pixel matrix. Element access is 1-indexed: image(j, k) with
// j in [1:n1], k in [1:n2]. The underlying Eigen storage is 0-indexed and is
// exposed through matrix() for bulk linear algebra.
class Image {
 public:
  Image() = default;
  Image(Index rows, Index cols, double fill = 0.0);
  explicit Image(Matrix values);

  static Image constant(Index rows, Index cols, double value) { return Image(rows, cols, value); }

  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }
  Index size() const { return values_.size(); }

  double operator()(Index j, Index k) const { return values_(j - 1, k - 1); }
  double& operator()(Index j, Index k) { return values_(j - 1, k - 1); }

  const Matrix& matrix() const { return values_; }
  Matrix& matrix() { return values_; }

  bool all_finite() const { return values_.allFinite(); }
  bool same_shape(const Image& other) const {
    return rows() == other.rows() && cols() == other.cols();
  }

  Image& operator+=(const Image& other);
  Image& operator-=(const Image& other);
  Image& operator*=(double s);

 private:
  Matrix values_;
};

Image operator+(Image a, const Image& b);
Image operator-(Image a, const Image& b);
Image operator*(double s, Image a);

// Frobenius inner product and norms.
double inner(const Image& a, const Image& b);
double squared_norm(const Image& a);
double l1_norm(const Image& a);
double max_abs(const Image& a);
double max_abs_diff(const Image& a, const Image& b);

// The total derivative of an n1 x n2 image lives on [2:n1] x [2:n2]. Storage
// slot (a, b) in [1:n1-1] x [1:n2-1] holds the entry indexed (j, k) = (a+1, b+1);
// the at(j, k) accessor takes the derivative-grid index directly.
class DerivativeField {
 public:
  DerivativeField() = default;
  DerivativeField(Index image_rows, Index image_cols, double fill = 0.0);
  // Wraps an (n1-1) x (n2-1) matrix.
  explicit DerivativeField(Matrix values);

  Index image_rows() const { return values_.rows() + 1; }
  Index image_cols() const { return values_.cols() + 1; }
  Index rows() const { return values_.rows(); }
  Index cols() const { return values_.cols(); }

  double at(Index j, Index k) const { return values_(j - 2, k - 2); }
  double& at(Index j, Index k) { return values_(j - 2, k - 2); }

  const Matrix& matrix() const { return values_; }
  Matrix& matrix() { return values_; }

  double l1() const { return values_.cwiseAbs().sum(); }
  Index nonzeros(double threshold = 0.0) const;

 private:
  Matrix values_;
};

double inner(const DerivativeField& a, const DerivativeField& b);

}  // namespace tvd
