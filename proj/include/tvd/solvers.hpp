#pragma once

#include <optional>
#include <vector>

#include "tvd/core.hpp"
#include "tvd/dictionary.hpp"
#include "tvd/image.hpp"

namespace tvd {

// Tuning of the four-part estimator
//   argmin ||Y - f||^2/n + 2 lambda TV(f) + 2 lambda1 TV1(f) + 2 lambda2 TV2(f).
// sigma and the confidence levels x, t only feed the tuning schedules and
// bound reports; the estimator itself does not read them.
struct TuningConfig {
  double lambda = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double sigma = 1.0;
  double confidence_x = 1.0;
  double confidence_t = 1.0;

  void validate() const;
};

// sigma * sqrt(2 log(2 n_axis) / n): the one-dimensional universal choice for
// a main-effect vector whose entries carry noise of variance sigma^2 / n_other.
double default_main_effect_lambda(double sigma, Index n_axis, Index n_other);

// kPlain penalizes every coefficient by lambda. kStandardized multiplies the
// penalty of beta_{j,k} by the empirical standard deviation ||psi~^{j,k}||/sqrt(n)
// of its atom, which is what a Lasso package that standardizes its design
// columns computes; it is not the total variation estimator.
enum class PenaltyScaling { kPlain, kStandardized };

// Per-coefficient penalty multipliers in derivative-field layout.
Matrix interaction_penalty_weights(Index n1, Index n2, PenaltyScaling scaling);

struct InteractionLassoOptions {
  double tol = 1e-6;              // KKT residual target
  long max_sweeps = 0;            // 0 selects 50 * n1 * n2
  std::optional<DerivativeField> warm_start;
  bool record_objective = false;  // keep the objective after every sweep
  PenaltyScaling scaling = PenaltyScaling::kPlain;
};

struct InteractionLassoResult {
  Image estimate;                  // f^~ = sum beta_{j,k} psi~^{j,k}
  CoefficientField coefficients;   // interaction block filled, rest zero
  double kkt_residual = 0.0;
  double objective = 0.0;
  long sweeps = 0;
  bool converged = false;
  std::vector<double> objective_trace;

  DerivativeField beta() const { return coefficients.interaction_block(); }
};

// ||y - f||^2 / n + 2 lambda ||Delta f||_1.
double interaction_objective(const Image& y_tilde, const Image& f, double lambda);

// Null threshold max_{j,k} |<psi~^{j,k}, y>| / n: at or above it the Lasso
// solution is identically zero.
double interaction_lambda_max(const Image& y_tilde);

// Lasso over the doubly centered half-interval dictionary,
//   min_beta ||y - sum beta psi~||^2 / n + 2 lambda sum |beta|,
// by cyclic coordinate descent on a working set with closed-form Gram entries,
// interleaved with exact sign-constrained solves on the support.
// The KKT residual is max_{j,k} of the distance of <psi~^{j,k}, r>/n to
// lambda * sign(beta_{j,k}) (active) or to [-lambda, lambda] (inactive).
InteractionLassoResult interaction_lasso(const Image& y_tilde, double lambda,
                                         const InteractionLassoOptions& options = {});

// Independent reference: solves the analysis problem
//   min_f ||y - f||^2 / n + 2 lambda ||Delta f||_1
// through its box-constrained dual, by projected gradient followed by an exact
// active-set finish. Dense; capped at 16 x 16.
struct AnalysisOracleResult {
  Image estimate;
  double duality_gap = 0.0;
};
inline constexpr Index kAnalysisOracleMaxSide = 16;
AnalysisOracleResult analysis_oracle_solve_report(const Image& y_tilde, double lambda);
Image analysis_oracle_solve(const Image& y_tilde, double lambda);

// Max-abs violation of (Y~ - f)/n = lambda D1^T q D2 over subgradients q of
// ||Delta f||_1. Because D1^T . D2 maps the derivative grid one-to-one onto
// doubly centered images, the unique q solving the equation is the
// quadrant-sum field of (Y~ - f)/(n lambda); the residual is its distance to
// the admissible box (sign on the active set, [-1, 1] elsewhere), scaled by
// lambda, plus any part of Y~ - f outside the doubly centered subspace.
double kkt_certify(const Image& y_tilde, const Image& f_hat, double lambda);

struct DenoiseOptions {
  InteractionLassoOptions interaction;
};

struct DenoiseResult {
  AnovaParts estimate;
  double objective = 0.0;
  double kkt_residual = 0.0;
  long iterations = 0;
  bool converged = false;

  Image image() const { return anova_recompose(estimate); }
};

double denoise_objective(const Image& y, const Image& f, const TuningConfig& cfg);

DenoiseResult denoise(const Image& y, const TuningConfig& cfg, const DenoiseOptions& options = {});

}  // namespace tvd
