#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tvd/dictionary.hpp"
#include "tvd/image.hpp"

namespace tvd {

// Jump locations t_m = (t_{1,m}, t_{2,m}), each in [3:n1-1] x [3:n2-1].
struct ActiveSet {
  std::vector<AtomIndex> jumps;

  Index size() const { return static_cast<Index>(jumps.size()); }
  bool contains(AtomIndex idx) const;
};

// Throws DomainError for out-of-range or duplicate jumps.
void validate_active_set(const ActiveSet& s, Index n1, Index n2);

// Indices of the nonzero entries of Delta f, in column-major order.
ActiveSet active_set_of(const Image& f, double threshold = 1e-12);

// ---- tuning schedules ------------------------------------------------------

// lambda_0(t) = sigma sqrt((2 log(2n) + 2t) / n).
double universal_lambda(double sigma, double n, double t);

// 4 sigma sqrt(log(2n) / (n sqrt(s))).
double thm4_lambda(double s, double sigma, double n);

// sigma sqrt(log(2n) / (2n)), the value used in the published simulation.
double paper_sim_lambda(double sigma, double n);

// ---- tessellations -----------------------------------------------------------

// Rectangle [lo1:hi1] x [lo2:hi2] of the derivative grid around one jump.
struct Cell {
  AtomIndex jump;
  Index lo1 = 0, hi1 = 0, lo2 = 0, hi2 = 0;

  Index d1_minus() const { return jump.j - lo1; }
  Index d1_plus() const { return hi1 - jump.j; }
  Index d2_minus() const { return jump.k - lo2; }
  Index d2_plus() const { return hi2 - jump.k; }
  // Quadrant areas d^{--}, d^{-+}, d^{++}, d^{+-}.
  std::array<double, 4> areas() const;
  bool contains(Index j, Index k) const { return j >= lo1 && j <= hi1 && k >= lo2 && k <= hi2; }
};

struct Tessellation {
  Index n1 = 0;
  Index n2 = 0;
  std::vector<Cell> cells;

  Index d1_max() const;
  Index d2_max() const;
};

// Guillotine construction: a region holding several jumps is cut along the
// widest gap between consecutive distinct jump coordinates (rows first on
// ties) at the floor midpoint; neighbouring rectangles share the cut line.
// Throws TessellationError when two jumps cannot be separated (gap < 2).
Tessellation build_tessellation(const ActiveSet& s, Index n1, Index n2);

// Empty string when the four defining conditions hold, else a description of
// the first failure. Checks coverage and overlaps by brute force.
std::string check_tessellation(const Tessellation& tess);

// Noise weights v on [2:n1] x [2:n2] from the quadrant formula, together with
// the antiprojection bound v~ = sqrt(|j - t1|/n1 + |k - t2|/n2) (smallest
// value over the rectangles containing a point) and
// gamma~ = 2 sqrt(d1max/n1 + d2max/n2).
struct WeightField {
  DerivativeField v;
  DerivativeField v_tilde;
  double gamma_tilde = 0.0;
};

// 1 - (1 - sqrt x)(1 - y)/2 - (1 - x)(1 - sqrt y)/2.
double quadrant_weight(double x, double y);

WeightField noise_weights(const Tessellation& tess);

// Sign configuration: one entry +-1 per jump, in the order of tess.cells.
using SignConfig = std::vector<int>;

// w = q_m (1 - v) on each R_m.
DerivativeField interpolating_matrix(const Tessellation& tess, const WeightField& weights,
                                     const SignConfig& signs);

// 1/2 (log(e n1) + log(e n2)) sum_m (n/d^{--} + n/d^{-+} + n/d^{++} + n/d^{+-}).
double gamma_bound_formula(const Tessellation& tess);
double gamma_bound_from_areas(Index n1, Index n2, const std::vector<std::array<double, 4>>& areas);

// The squared effective-sparsity term of the square, regular-grid special
// case: 8 s^2 n log(e^2 n) / (sqrt(n) - 1)^2.
double thm4_gamma_squared(double s, double n);

// n ||D1^T w D2||_2^2.
double gamma_exact_from_w(const DerivativeField& w);

// max over ||f||^2/n = 1 of
//   sum_S q (Delta f)_S - ||(1 - v)_{-S} (Delta f)_{-S}||_1,
// estimated from below by random restarts followed by projected
// supergradient ascent on the sphere. The constant image (value 0) and the
// image D1^T q D2 are always among the candidates. Deterministic in seed.
struct SparsitySampleOptions {
  int restarts = 1000;
  int ascent_steps = 30;
  std::uint64_t seed = 1;
};
double effective_sparsity_sampled(const ActiveSet& s, const DerivativeField& v, const DerivativeField& q,
                                  const SparsitySampleOptions& options = {});

// Sign configuration as a field: q at the jumps, zero elsewhere.
DerivativeField sign_field(const Tessellation& tess, const SignConfig& signs);

// ---- antiprojections -----------------------------------------------------------

inline constexpr Index kAntiprojectionMaxSide = 64;

// ||A_U psi^{j,k}||^2 / n for every (j,k) in [2:n1] x [2:n2], with U spanned
// by psi^{t} (centered = false) or psi~^{t} (centered = true) over the jumps
// t in s. Dense least squares; throws SizeCapError above 64 x 64.
DerivativeField antiprojection_field(const ActiveSet& s, Index n1, Index n2, bool centered);
double antiprojection_exact(const ActiveSet& s, AtomIndex idx, Index n1, Index n2, bool centered);

// ---- mesh grids -------------------------------------------------------------------

struct MeshGrid {
  Index t1 = 0, t2 = 0, n1 = 0, n2 = 0;
  std::vector<Index> m1, n1_set, m2, n2_set;
  ActiveSet s_m;        // M1 x N2 union N1 x M2
  ActiveSet s_n;        // N1 x N2
  ActiveSet augmented;  // s_m plus t1 t2 extra points
  Index size_before = 0;
  Index size_after = 0;
};

// Throws DomainError naming the nearest valid sizes when n_i / (t_i^2 + 1) is
// not an integer.
MeshGrid build_mesh_grid(Index t1, Index t2, Index n1, Index n2);

// 1/t1^2 + 1/t2^2 + ceil(t1/2) ceil(t2/2) / (t1^2 t2^2).
double mesh_antiprojection_bound(Index t1, Index t2);

// ---- slow rates -------------------------------------------------------------------

struct SlowRateConfig {
  Index s_raw = 0;       // ceiling of the displayed formula
  Index t = 0;           // even, with 2 t^3 >= s_raw
  Index s_m = 0;         // 2 t^3
  double lambda = 0.0;
  double gamma_tilde = 0.0;  // 3 / (2 t)
  // gamma~ lambda_0(log(2n)), the smallest lambda the underlying oracle
  // inequality admits, and whether lambda reaches it. The displayed s_M has no
  // n^{3/8} factor, so at fixed t the displayed lambda falls below this floor
  // once n is moderately large.
  double lambda_floor = 0.0;
  bool admissible = false;
};

// tv_f0 present: the branch that may depend on the truth; absent: the
// data-driven branch (TV(f0) replaced by sigma).
SlowRateConfig slow_rate_config(double sigma, double n, std::optional<double> tv_f0 = std::nullopt);

// ---- oracle inequalities ------------------------------------------------------------

// ||(Delta g)_{-S}||_1.
double off_support_tv(const Image& g, const ActiveSet& s);

// ||g - f0~||^2/n + 4 lambda ||(Delta g)_{-S}||_1
//   + (sigma sqrt(s/n) + sigma sqrt(2x/n) + lambda sqrt(Gamma bound))^2.
double oracle_rhs_fast(const Image& g, const ActiveSet& s, const Tessellation& tess, double sigma,
                       double lambda, double x, const Image& f0_tilde);

// ||g - f0~||^2/n + 4 lambda ||Delta g||_1 + (sigma sqrt(2x/n) + sigma sqrt(s/n))^2.
double oracle_rhs_slow(const Image& g, double sigma, double lambda, double s, double x, const Image& f0_tilde);

// Same as oracle_rhs_fast with the special-case Gamma term of thm4_gamma_squared.
double oracle_rhs_thm4(const Image& g, const ActiveSet& s, double sigma, double lambda, double x,
                       const Image& f0_tilde);

// 1 - e^{-x} - e^{-t}.
double bound_probability(double x, double t);

struct BoundReport {
  double gamma_tilde = 0.0;
  double lambda_universal = 0.0;
  double lambda_fast = 0.0;
  double gamma_squared_bound = 0.0;
  double oracle_rhs = 0.0;
  double probability = 0.0;
};

// Fast-rate report for g = f0~ and the given active set; x and t default to
// log(2n) when not positive.
BoundReport bound_report(const Image& f0_tilde, const ActiveSet& s, double sigma, double lambda,
                         double x = 0.0, double t = 0.0);

double fast_lambda(const Tessellation& tess, double sigma, double t);

}  // namespace tvd
