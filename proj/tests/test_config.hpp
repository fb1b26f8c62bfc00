#pragma once

#include <cstdint>
#include <random>

#include "tvd/image.hpp"

namespace tvd::testing {

// Exact identities on unit-scale data.
inline constexpr double kIdentityTol = 1e-10;
// Linearity of Delta.
inline constexpr double kLinearityTol = 1e-12;
// Solver-level agreement and certification.
inline constexpr double kSolverTol = 1e-6;
inline constexpr double kOracleTol = 1e-8;

inline Image random_image(Index n1, Index n2, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Image f(n1, n2);
  for (Index k = 1; k <= n2; ++k)
    for (Index j = 1; j <= n1; ++j) f(j, k) = normal(rng);
  return f;
}

inline Vector random_vector(Index m, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Vector v(m);
  for (Index i = 0; i < m; ++i) v(i) = normal(rng);
  return v;
}

}  // namespace tvd::testing
