#include "tvd/image.hpp"

#include <string>

namespace tvd {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
}

}  // namespace

Image::Image(Index rows, Index cols, double fill) {
  if (rows < 1 || cols < 1) {
    throw DimensionError("image dimensions must be positive");
  }
  values_ = Matrix::Constant(rows, cols, fill);
}

Image::Image(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw DimensionError("image dimensions must be positive");
  }
}

Image& Image::operator+=(const Image& other) {
  require_same_shape(values_, other.values_, "image addition");
  values_ += other.values_;
  return *this;
}

Image& Image::operator-=(const Image& other) {
  require_same_shape(values_, other.values_, "image subtraction");
  values_ -= other.values_;
  return *this;
}

Image& Image::operator*=(double s) {
  values_ *= s;
  return *this;
}

Image operator+(Image a, const Image& b) { return a += b; }
Image operator-(Image a, const Image& b) { return a -= b; }
Image operator*(double s, Image a) { return a *= s; }

double inner(const Image& a, const Image& b) {
  require_same_shape(a.matrix(), b.matrix(), "inner product");
  return (a.matrix().array() * b.matrix().array()).sum();
}

double squared_norm(const Image& a) { return a.matrix().squaredNorm(); }
double l1_norm(const Image& a) { return a.matrix().cwiseAbs().sum(); }
double max_abs(const Image& a) { return a.matrix().cwiseAbs().maxCoeff(); }

double max_abs_diff(const Image& a, const Image& b) {
  require_same_shape(a.matrix(), b.matrix(), "max_abs_diff");
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

DerivativeField::DerivativeField(Index image_rows, Index image_cols, double fill) {
  if (image_rows < 2 || image_cols < 2) {
    throw DimensionError("derivative field needs an image of at least 2x2");
  }
  values_ = Matrix::Constant(image_rows - 1, image_cols - 1, fill);
}

DerivativeField::DerivativeField(Matrix values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw DimensionError("derivative field dimensions must be positive");
  }
}

Index DerivativeField::nonzeros(double threshold) const {
  return (values_.array().abs() > threshold).count();
}

double inner(const DerivativeField& a, const DerivativeField& b) {
  require_same_shape(a.matrix(), b.matrix(), "derivative inner product");
  return (a.matrix().array() * b.matrix().array()).sum();
}

}  // namespace tvd
