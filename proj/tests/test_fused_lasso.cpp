#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "test_config.hpp"
#include "tvd/fused_lasso.hpp"

using namespace tvd;

namespace {

Index distinct_runs(const Vector& b, double tol) {
  Index runs = 1;
  for (Index i = 1; i < b.size(); ++i)
    if (std::abs(b(i) - b(i - 1)) > tol) ++runs;
  return runs;
}

}  // namespace

TEST_CASE("zero penalty returns the data") {
  std::mt19937_64 rng(1);
  const Vector y = testing::random_vector(9, rng);
  CHECK((fused_lasso_1d(y, 0.0) - y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("length one and two") {
  Vector one(1);
  one << 3.0;
  CHECK(fused_lasso_1d(one, 5.0)(0) == 3.0);
  Vector two(2);
  two << 0.0, 1.0;
  // 1/2||y-b||^2 + mu|b2-b1| with mu = 2 lambda: fuse when mu >= 1/2.
  const Vector b = fused_lasso_1d(two, 0.1);
  CHECK(b(0) == doctest::Approx(0.2));
  CHECK(b(1) == doctest::Approx(0.8));
  const Vector fused = fused_lasso_1d(two, 0.3);
  CHECK(fused(0) == doctest::Approx(0.5));
  CHECK(fused(1) == doctest::Approx(0.5));
}

TEST_CASE("saturation collapses to the mean") {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector y = testing::random_vector(3 + rep, rng);
    const double sat = fused_lasso_saturation(y);
    const Vector b = fused_lasso_1d(y, sat * (1.0 + 1e-9));
    CHECK((b.array() - y.mean()).abs().maxCoeff() <= 1e-10);
    const Vector b2 = fused_lasso_1d(y, 10.0 * sat);
    CHECK((b2.array() - y.mean()).abs().maxCoeff() <= 1e-10);
    if (sat > 0.0) {
      const Vector below = fused_lasso_1d(y, 0.9 * sat);
      CHECK(distinct_runs(below, 1e-12) > 1);
    }
  }
}

TEST_CASE("length-5 instance matches the dual oracle") {
  Vector y(5);
  y << 0.3, -1.2, 2.0, 0.7, 0.1;
  const Vector b = fused_lasso_1d(y, 0.1);
  const Vector ref = oracle::fused_lasso(y, 0.1);
  CHECK((b - ref).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("random instances match the dual oracle") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lam(0.0, 0.6);
  for (int rep = 0; rep < 200; ++rep) {
    const Index m = 2 + rep % 12;
    Vector y = testing::random_vector(m, rng);
    if (rep % 3 == 0) {
      // piecewise constant signal plus noise
      for (Index i = 0; i < m; ++i) y(i) = 0.2 * y(i) + (i >= m / 2 ? 1.0 : 0.0);
    }
    const double lambda = lam(rng);
    const Vector b = fused_lasso_1d(y, lambda);
    const Vector ref = oracle::fused_lasso(y, lambda, 200000);
    CHECK((b - ref).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(fused_lasso_objective(y, b, lambda) <= fused_lasso_objective(y, ref, lambda) + 1e-12);
    CHECK(std::abs(b.mean() - y.mean()) <= 1e-12);
  }
}

TEST_CASE("optimality against perturbations on longer inputs") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int rep = 0; rep < 20; ++rep) {
    const Vector y = testing::random_vector(200, rng);
    const double lambda = 0.002 * (1 + rep);
    const Vector b = fused_lasso_1d(y, lambda);
    const double best = fused_lasso_objective(y, b, lambda);
    for (int t = 0; t < 50; ++t) {
      Vector p = b;
      const Index i = static_cast<Index>(rng() % 200);
      p(i) += 1e-4 * normal(rng);
      CHECK(fused_lasso_objective(y, p, lambda) >= best - 1e-14);
    }
  }
}

TEST_CASE("invalid arguments") {
  CHECK_THROWS_AS(fused_lasso_1d(Vector::Ones(3), -0.1), DomainError);
  CHECK_THROWS_AS(fused_lasso_1d(Vector(), 0.1), DimensionError);
  CHECK(fused_lasso_weight(0.5, 8) == 4.0);
}
