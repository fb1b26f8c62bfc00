#include "tvd/core.hpp"

#include <cmath>
#include <string>

namespace tvd {

namespace {

void require_derivable(const Image& f) {
  if (f.rows() < 2 || f.cols() < 2) {
    throw DimensionError("total derivative needs n1 >= 2 and n2 >= 2, got " +
                         std::to_string(f.rows()) + "x" + std::to_string(f.cols()));
  }
}

}  // namespace

DerivativeField total_derivative(const Image& f) {
  require_derivable(f);
  const Matrix& m = f.matrix();
  const Index r = m.rows() - 1;
  const Index c = m.cols() - 1;
  Matrix d = m.bottomRightCorner(r, c) - m.bottomLeftCorner(r, c) - m.topRightCorner(r, c) +
             m.topLeftCorner(r, c);
  return DerivativeField(std::move(d));
}

Image adjoint_derivative(const DerivativeField& w) {
  const Matrix& wm = w.matrix();
  const Index n1 = wm.rows() + 1;
  const Index n2 = wm.cols() + 1;
  // D1^T w: row i receives w(i-1) - w(i) (0-based, out-of-range rows are zero).
  Matrix left = Matrix::Zero(n1, n2 - 1);
  left.bottomRows(n1 - 1) += wm;
  left.topRows(n1 - 1) -= wm;
  Matrix out = Matrix::Zero(n1, n2);
  out.rightCols(n2 - 1) += left;
  out.leftCols(n2 - 1) -= left;
  return Image(std::move(out));
}

double partial_integration_sum(const DerivativeField& w, const Image& f) {
  const Index n1 = w.image_rows();
  const Index n2 = w.image_cols();
  if (f.rows() != n1 || f.cols() != n2) {
    throw DimensionError("partial_integration_sum: field and image disagree");
  }
  double sum = 0.0;
  for (Index j = 2; j <= n1 - 1; ++j) {
    for (Index k = 2; k <= n2 - 1; ++k) {
      const double dw = w.at(j + 1, k + 1) - w.at(j + 1, k) - w.at(j, k + 1) + w.at(j, k);
      sum += dw * f(j, k);
    }
  }
  return sum;
}

double tv(const Image& f) { return total_derivative(f).l1(); }

double tv1(const Image& f) {
  const Vector means = f.matrix().rowwise().mean();
  double s = 0.0;
  for (Index j = 1; j < means.size(); ++j) s += std::abs(means(j) - means(j - 1));
  return s;
}

double tv2(const Image& f) {
  const Vector means = f.matrix().colwise().mean().transpose();
  double s = 0.0;
  for (Index k = 1; k < means.size(); ++k) s += std::abs(means(k) - means(k - 1));
  return s;
}

Image AnovaParts::mean_image() const { return Image(rows(), cols(), global_mean); }

Image AnovaParts::row_image() const {
  return Image(Matrix(row_effects * Eigen::RowVectorXd::Ones(cols())));
}

Image AnovaParts::col_image() const {
  return Image(Matrix(Vector::Ones(rows()) * col_effects.transpose()));
}

AnovaParts anova_decompose(const Image& f) {
  const Matrix& m = f.matrix();
  AnovaParts p;
  p.global_mean = m.mean();
  p.row_effects = m.rowwise().mean().array() - p.global_mean;
  p.col_effects = m.colwise().mean().transpose().array() - p.global_mean;
  Matrix inter = m;
  inter.array() -= p.global_mean;
  inter.colwise() -= p.row_effects;
  inter.rowwise() -= p.col_effects.transpose();
  p.interactions = Image(std::move(inter));
  return p;
}

Image anova_recompose(const AnovaParts& p) {
  const Index n1 = p.interactions.rows();
  const Index n2 = p.interactions.cols();
  if (p.row_effects.size() != n1 || p.col_effects.size() != n2) {
    throw DimensionError("anova_recompose: component dimensions disagree");
  }
  Matrix m = p.interactions.matrix();
  m.array() += p.global_mean;
  m.colwise() += p.row_effects;
  m.rowwise() += p.col_effects.transpose();
  return Image(std::move(m));
}

Matrix double_center(const Matrix& m) {
  Matrix out = m;
  out.colwise() -= Vector(m.rowwise().mean());
  out.rowwise() -= Eigen::RowVectorXd(out.colwise().mean());
  return out;
}

Image interaction_part(const Image& f) { return Image(double_center(f.matrix())); }

double centering_defect(const Image& f) {
  const double r = f.matrix().rowwise().sum().cwiseAbs().maxCoeff();
  const double c = f.matrix().colwise().sum().cwiseAbs().maxCoeff();
  return std::max(r, c);
}

}  // namespace tvd
