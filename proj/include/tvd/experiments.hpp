#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tvd/image.hpp"
#include "tvd/solvers.hpp"

namespace tvd {

// Indicator of [n1/4+1, 3n1/4] x [n2/4+1, 3n2/4]. Sizes must be multiples of 4.
Image generate_truth(Index n1, Index n2);

enum class LambdaRule { kPaperSim, kThm4, kUniversal, kCustom };

std::string to_string(LambdaRule rule);
LambdaRule lambda_rule_from_string(const std::string& name);  // throws DomainError

struct SimConfig {
  std::vector<Index> sizes{16, 32, 48, 64, 96, 128};  // n1 = n2, multiples of 4, >= 8
  int reps = 20;
  double sigma = 1.0;
  LambdaRule rule = LambdaRule::kPaperSim;
  double lambda_value = 0.0;  // used by kCustom
  double lambda_multiplier = 1.0;
  // kPlain is the total variation estimator. kStandardized reproduces a Lasso
  // package's default column standardization and is kept for comparison.
  PenaltyScaling scaling = PenaltyScaling::kPlain;
  std::uint64_t seed = 20190101;
  int window = 5;      // slope fit over the largest `window` sizes
  double tol = 1e-6;   // KKT target
  int threads = 0;     // 0: hardware concurrency

  void validate() const;
};

// Lambda used for an n1 x n1 image under the config's rule and multiplier.
double simulation_lambda(const SimConfig& cfg, Index n1);

struct SimRow {
  Index n1 = 0;
  int rep = 0;
  double lambda = 0.0;
  double mse = 0.0;
  double bound = 0.0;  // oracle right-hand side at the lambda used
  bool violated = false;
  bool converged = false;
  double kkt_residual = 0.0;
  std::string error;   // non-empty when the solve threw
};

struct SizeStats {
  Index n1 = 0;
  double lambda = 0.0;
  double mean_mse = 0.0;
  double sd_mse = 0.0;
  double violation_rate = 0.0;
  int failures = 0;
};

struct SimResult {
  std::vector<SimRow> rows;       // ordered by (size, rep)
  std::vector<SizeStats> per_size;
  double slope = 0.0;             // of log(mean mse) against log(n1 n2)
  double intercept = 0.0;
  std::vector<Index> window_sizes;
  double rank_correlation = 0.0;  // Spearman, mean mse against size, over the window
};

// Least-squares slope and intercept of y on x.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Noise for (seed, size, rep) comes from its own Philox substream, so results
// do not depend on the thread count.
SimResult run_rate_simulation(const SimConfig& cfg);

inline constexpr int kSimSchemaVersion = 1;
void write_simulation_csv(std::ostream& out, const SimResult& result);
nlohmann::json simulation_summary(const SimConfig& cfg, const SimResult& result);

// Reads a simulation config; missing or mistyped fields raise FormatError
// naming the field. Required: sizes, reps, sigma, lambda_rule, seed.
SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json sim_config_to_json(const SimConfig& cfg);

// ---- Monte Carlo checks of the oracle inequalities ----------------------------

enum class OracleTheorem { kThm4, kFastMain, kSlowMesh };

std::string to_string(OracleTheorem theorem);

struct OracleMcConfig {
  OracleTheorem theorem = OracleTheorem::kThm4;
  Index n1 = 32;  // square images; kSlowMesh needs n1 divisible by 4 and t^2 + 1
  int reps = 100;
  double sigma = 1.0;
  std::uint64_t seed = 7;
  double lambda_multiplier = 1.0;
  int threads = 0;
};

struct OracleMcResult {
  OracleTheorem theorem = OracleTheorem::kThm4;
  Index n1 = 0;
  double lambda = 0.0;
  double lambda_displayed = 0.0;  // kSlowMesh: the theorem's formula before flooring
  double rhs = 0.0;
  double probability = 0.0;
  int reps = 0;
  int violations = 0;
  int failures = 0;
  double mean_mse = 0.0;
  double max_mse = 0.0;

  double rate() const { return reps > 0 ? static_cast<double>(violations) / reps : 0.0; }
};

// Realized ||f^~ - f0~||^2/n against the theorem's right-hand side at
// g = f0~ and S = the true jumps (kThm4, kFastMain) or a mesh grid (kSlowMesh),
// with x = t = log(2n). kSlowMesh uses the data-driven branch and raises its
// lambda to the admissible floor gamma~ lambda_0 when the formula falls short.
// Throws DomainError for inadmissible sizes.
OracleMcResult verify_oracle_bound(const OracleMcConfig& cfg);

}  // namespace tvd
