#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "tvd/experiments.hpp"

namespace tvd {

// Outcome of one invariant suite. `worst` is the suite's headline number: the
// largest violation margin for inequality suites, the largest error for
// identity and solver suites, the slope for the rate suite.
struct SuiteReport {
  std::string name;
  bool passed = true;
  long checks = 0;
  long violations = 0;
  double worst = 0.0;
  std::string first_failure;
  nlohmann::json details = nlohmann::json::object();

  nlohmann::json to_json() const;
};

// ANOVA orthogonality and Pythagoras, expansion round trip, summation by
// parts, and adjointness of Delta on random images; tolerance 1e-10.
SuiteReport suite_identities(int instances = 100, std::uint64_t seed = 1);

// (1/2)[(1 - sqrt x)(1 - y) + (1 - x)(1 - sqrt y)] <= 1 - (sqrt x + sqrt y)/2
// on a grid x grid sweep of [0, 1]^2.
SuiteReport suite_lemma75(int grid = 200);

// sqrt((j-t1)/n1 + (k-t2)/n2) <= (sqrt((j-t1)/d1) + sqrt((k-t2)/d2)) sqrt(d1/n1 + d2/n2)
// on random integer tuples.
SuiteReport suite_lemma76(int tuples = 1000, std::uint64_t seed = 1);

// ||P_W z - P_{P_W U} P_W z|| <= ||z - P_U z|| on random subspace triples in
// dimension at most 50.
SuiteReport suite_lemma77(int triples = 100, std::uint64_t seed = 1);

// Exact antiprojections against |j - t1|/n1 + |k - t2|/n2 on every rectangle
// of a 24 x 24 grid with a regular 2 x 2 active set (plain and centered atoms).
SuiteReport suite_antiprojections();

// Exact antiprojections onto the (t1, t2) = (3, 4) mesh on 30 x 51 against the
// mesh bound, at every point.
SuiteReport suite_mesh();

// sampled effective sparsity <= sqrt(n ||D1^T w D2||^2) <= sqrt(Gamma bound)
// on 12 x 12 with s = 4, for every sign configuration.
SuiteReport suite_sandwich(int restarts = 10000, std::uint64_t seed = 1);

// Synthesis and analysis solutions agree on 20 random 8 x 8 inputs for
// lambda in {0.01, 0.1, 1}; every solve certifies KKT <= 1e-6; at and above
// the null threshold the solution is exactly zero.
SuiteReport suite_solver(std::uint64_t seed = 1);

// Violation rates of the fast (thm4, 32 x 32) and slow (mesh, 40 x 40)
// oracle inequalities over `reps` noise draws; gate 5%.
SuiteReport suite_oracle_mc(int reps = 100, std::uint64_t seed = 7);

// Fitted slope of log mean MSE against log n over the window; passes when
// it falls in [lo, hi].
SuiteReport suite_rate(const SimConfig& cfg, double lo = -1.25, double hi = -0.80);

// Names accepted by run_suite, in order.
const std::vector<std::string>& suite_names();

// Runs a suite with its default arguments. Throws DomainError for unknown names.
SuiteReport run_suite(const std::string& name, std::uint64_t seed = 1);

}  // namespace tvd
