#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "test_config.hpp"
#include "tvd/core.hpp"

using namespace tvd;
using tvd::testing::kIdentityTol;

namespace {

Image truth(Index n) { return Image(oracle::truth(n, n)); }

DerivativeField random_field(Index n1, Index n2, std::mt19937_64& rng, bool zero_boundary) {
  DerivativeField w(n1, n2);
  std::normal_distribution<double> normal;
  for (Index j = 2; j <= n1; ++j) {
    for (Index k = 2; k <= n2; ++k) {
      const bool boundary = j == 2 || j == n1 || k == 2 || k == n2;
      w.at(j, k) = (zero_boundary && boundary) ? 0.0 : normal(rng);
    }
  }
  return w;
}

}  // namespace

TEST_CASE("total derivative of a constant image vanishes") {
  const DerivativeField d = total_derivative(Image::constant(4, 4, 5.0));
  CHECK(d.rows() == 3);
  CHECK(d.cols() == 3);
  CHECK(d.matrix().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("total derivative of the 8x8 truth has four unit jumps") {
  const DerivativeField d = total_derivative(truth(8));
  CHECK(d.nonzeros() == 4);
  CHECK(d.at(3, 3) == 1.0);
  CHECK(d.at(3, 7) == -1.0);
  CHECK(d.at(7, 3) == -1.0);
  CHECK(d.at(7, 7) == 1.0);
}

TEST_CASE("total derivative matches the four-point formula") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const Image f = testing::random_image(5 + rep % 3, 4 + rep % 5, rng);
    CHECK((total_derivative(f).matrix() - oracle::delta(f.matrix())).cwiseAbs().maxCoeff() <= kIdentityTol);
  }
}

TEST_CASE("total derivative rejects thin images") {
  CHECK_THROWS_AS(total_derivative(Image(1, 5)), DimensionError);
  CHECK_THROWS_AS(total_derivative(Image(5, 1)), DimensionError);
  CHECK_THROWS_AS(tv(Image(1, 3)), DimensionError);
}

TEST_CASE("total derivative is linear") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Image f = testing::random_image(6, 7, rng);
    const Image g = testing::random_image(6, 7, rng);
    const double a = 1.7, b = -0.3;
    const Matrix lhs = total_derivative(a * f + b * g).matrix();
    const Matrix rhs = a * total_derivative(f).matrix() + b * total_derivative(g).matrix();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= testing::kLinearityTol);
  }
}

TEST_CASE("adjoint derivative") {
  SUBCASE("zero field maps to zero image") {
    CHECK(max_abs(adjoint_derivative(DerivativeField(5, 6))) == 0.0);
  }
  SUBCASE("unit entry gives the four-point stencil") {
    DerivativeField e(5, 5);
    e.at(3, 4) = 1.0;
    const Image a = adjoint_derivative(e);
    // D1^T e D2 puts +1 at (2,3),(3,4) and -1 at (2,4),(3,3).
    Image expected(5, 5);
    expected(2, 3) = 1.0;
    expected(3, 4) = 1.0;
    expected(2, 4) = -1.0;
    expected(3, 3) = -1.0;
    CHECK(max_abs_diff(a, expected) == 0.0);
  }
  SUBCASE("adjointness for arbitrary fields") {
    std::mt19937_64 rng(5);
    for (int rep = 0; rep < 100; ++rep) {
      const Image f = testing::random_image(5, 6, rng);
      const DerivativeField w = random_field(5, 6, rng, false);
      CHECK(std::abs(inner(w, total_derivative(f)) - inner(adjoint_derivative(w), f)) <= kIdentityTol);
    }
  }
  SUBCASE("partial integration with zero boundaries") {
    std::mt19937_64 rng(6);
    for (int rep = 0; rep < 100; ++rep) {
      const Image f = testing::random_image(5, 6, rng);
      const DerivativeField w = random_field(5, 6, rng, true);
      double direct = 0.0;
      const Matrix d = oracle::delta(f.matrix());
      for (Index i = 0; i < d.size(); ++i) direct += w.matrix().data()[i] * d.data()[i];
      CHECK(std::abs(direct - partial_integration_sum(w, f)) <= kIdentityTol);
    }
  }
}

TEST_CASE("total variation functionals") {
  const Image c = Image::constant(5, 6, 2.5);
  CHECK(tv(c) == 0.0);
  CHECK(tv1(c) == 0.0);
  CHECK(tv2(c) == 0.0);
  CHECK(tv(truth(8)) == doctest::Approx(4.0));

  std::mt19937_64 rng(8);
  const Vector r = testing::random_vector(6, rng);
  const Vector col = testing::random_vector(7, rng);
  Image additive(6, 7);
  for (Index j = 1; j <= 6; ++j)
    for (Index k = 1; k <= 7; ++k) additive(j, k) = r(j - 1) + col(k - 1);
  CHECK(tv(additive) <= kIdentityTol);
  double expected_tv1 = 0.0;
  for (Index j = 1; j < 6; ++j) expected_tv1 += std::abs(r(j) - r(j - 1));
  CHECK(tv1(additive) == doctest::Approx(expected_tv1).epsilon(1e-12));

  const Image f = testing::random_image(6, 7, rng);
  CHECK(tv(f) >= 0.0);
  CHECK(tv1(f) >= 0.0);
  CHECK(tv2(f) >= 0.0);
}

TEST_CASE("anova decomposition") {
  SUBCASE("constant image") {
    const AnovaParts p = anova_decompose(Image::constant(4, 5, 3.0));
    CHECK(p.global_mean == doctest::Approx(3.0));
    CHECK(p.row_effects.cwiseAbs().maxCoeff() <= kIdentityTol);
    CHECK(p.col_effects.cwiseAbs().maxCoeff() <= kIdentityTol);
    CHECK(max_abs(p.interactions) <= kIdentityTol);
  }
  SUBCASE("truth on 4x4 has mean one quarter") {
    CHECK(anova_decompose(truth(4)).global_mean == doctest::Approx(0.25));
  }
  SUBCASE("matches the brute-force components") {
    std::mt19937_64 rng(12);
    const Image f = testing::random_image(7, 9, rng);
    const AnovaParts p = anova_decompose(f);
    CHECK(std::abs(p.global_mean - oracle::mean(f.matrix())) <= kIdentityTol);
    const Vector r = oracle::row_means(f.matrix()).array() - oracle::mean(f.matrix());
    CHECK((p.row_effects - r).cwiseAbs().maxCoeff() <= kIdentityTol);
    CHECK((p.interactions.matrix() - oracle::interactions(f.matrix())).cwiseAbs().maxCoeff() <= kIdentityTol);
  }
  SUBCASE("orthogonality, Pythagoras and round trip") {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 100; ++rep) {
      const Image f = testing::random_image(7, 9, rng);
      const AnovaParts p = anova_decompose(f);
      const Image parts[4] = {p.mean_image(), p.row_image(), p.col_image(), p.interactions};
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) CHECK(std::abs(inner(parts[a], parts[b])) <= kIdentityTol);
      const double total = squared_norm(f);
      const double split = 63.0 * p.global_mean * p.global_mean + 9.0 * p.row_effects.squaredNorm() +
                           7.0 * p.col_effects.squaredNorm() + squared_norm(p.interactions);
      CHECK(std::abs(total - split) <= kIdentityTol * total);
      CHECK(max_abs_diff(anova_recompose(p), f) <= kIdentityTol);
      CHECK(std::abs(p.row_effects.sum()) <= kIdentityTol);
      CHECK(centering_defect(p.interactions) <= kIdentityTol);
      CHECK(tv(p.mean_image() + p.row_image() + p.col_image()) <= kIdentityTol);
    }
  }
  SUBCASE("additive images have no interactions") {
    Image f(5, 4);
    for (Index j = 1; j <= 5; ++j)
      for (Index k = 1; k <= 4; ++k) f(j, k) = 0.3 * j - 1.1 * k * k;
    CHECK(max_abs(anova_decompose(f).interactions) <= kIdentityTol);
  }
  SUBCASE("recompose rejects inconsistent parts") {
    AnovaParts p = anova_decompose(Image(4, 5));
    p.row_effects = Vector::Zero(3);
    CHECK_THROWS_AS(anova_recompose(p), DimensionError);
  }
}
