#include "tvd/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tvd/core.hpp"
#include "tvd/dictionary.hpp"
#include "tvd/rng.hpp"
#include "tvd/solvers.hpp"
#include "tvd/theory.hpp"

namespace tvd {

namespace {

using nlohmann::json;

constexpr double kIdentityTol = 1e-10;
constexpr double kSolverTol = 1e-6;

// Records one check: `excess` > 0 is a violation.
void record(SuiteReport& r, double excess, const std::string& what) {
  ++r.checks;
  r.worst = std::max(r.worst, excess);
  if (excess > 0.0) {
    ++r.violations;
    if (r.first_failure.empty()) r.first_failure = what;
  }
}

void finish(SuiteReport& r) { r.passed = r.violations == 0; }

Image random_image(Philox& rng, Index n1, Index n2) {
  Image f(n1, n2);
  for (Index i = 0; i < f.size(); ++i) f.matrix().data()[i] = rng.normal();
  return f;
}

Index uniform_int(Philox& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(rng.uniform() * static_cast<double>(hi - lo + 1)) % (hi - lo + 1);
}

std::string at(Index j, Index k) {
  std::ostringstream s;
  s << "(" << j << "," << k << ")";
  return s.str();
}

// Orthonormal basis of the column span of a.
Matrix orthonormal_basis(const Matrix& a) {
  if (a.cols() == 0) return Matrix(a.rows(), 0);
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  return qr.householderQ() * Matrix::Identity(a.rows(), qr.rank());
}

double residual_norm(const Matrix& basis, const Vector& z) { return (z - basis * (basis.transpose() * z)).norm(); }

}  // namespace

json SuiteReport::to_json() const {
  return json{{"suite", name},       {"passed", passed},   {"checks", checks},
              {"violations", violations}, {"worst", worst}, {"first_failure", first_failure},
              {"details", details}};
}

SuiteReport suite_identities(int instances, std::uint64_t seed) {
  SuiteReport r;
  r.name = "identities";
  Philox rng(seed, 0x1de, 0);
  double anova = 0.0, expansion = 0.0, parts = 0.0, adjoint = 0.0;
  for (int i = 0; i < instances; ++i) {
    const Index n1 = uniform_int(rng, 2, 20);
    const Index n2 = uniform_int(rng, 2, 20);
    const Image f = random_image(rng, n1, n2);
    const std::string tag = "instance " + std::to_string(i) + " (" + std::to_string(n1) + "x" + std::to_string(n2) + ")";

    const AnovaParts p = anova_decompose(f);
    const Image pieces[4] = {p.mean_image(), p.row_image(), p.col_image(), p.interactions};
    double err = max_abs_diff(anova_recompose(p), f);
    double sum_sq = 0.0;
    for (int a = 0; a < 4; ++a) {
      sum_sq += squared_norm(pieces[a]);
      for (int b = a + 1; b < 4; ++b) err = std::max(err, std::abs(inner(pieces[a], pieces[b])));
    }
    err = std::max(err, std::abs(sum_sq - squared_norm(f)));
    anova = std::max(anova, err);
    record(r, err - kIdentityTol, tag + ": ANOVA orthogonality");

    const double round_trip = max_abs_diff(synthesize(expansion_coefficients(f)), f);
    expansion = std::max(expansion, round_trip);
    record(r, round_trip - kIdentityTol, tag + ": expansion round trip");

    if (n1 >= 3 && n2 >= 3) {
      // w vanishing on the boundary of [2:n1] x [2:n2]
      DerivativeField w(n1, n2);
      for (Index j = 3; j <= n1 - 1; ++j)
        for (Index k = 3; k <= n2 - 1; ++k) w.at(j, k) = rng.normal();
      const double e = std::abs(inner(w, total_derivative(f)) - partial_integration_sum(w, f));
      parts = std::max(parts, e);
      record(r, e - kIdentityTol, tag + ": summation by parts");
    }

    DerivativeField w(n1, n2);
    for (Index i2 = 0; i2 < w.matrix().size(); ++i2) w.matrix().data()[i2] = rng.normal();
    const double e = std::abs(inner(total_derivative(f), w) - inner(f, adjoint_derivative(w)));
    adjoint = std::max(adjoint, e);
    record(r, e - kIdentityTol, tag + ": adjointness");
  }
  r.worst = std::max({anova, expansion, parts, adjoint});
  r.details = {{"anova", anova}, {"expansion", expansion}, {"partial_integration", parts}, {"adjoint", adjoint},
               {"tolerance", kIdentityTol}};
  finish(r);
  return r;
}

SuiteReport suite_lemma75(int grid) {
  SuiteReport r;
  r.name = "lemma75";
  r.worst = -1.0;
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      const double x = grid > 1 ? static_cast<double>(a) / (grid - 1) : 0.0;
      const double y = grid > 1 ? static_cast<double>(b) / (grid - 1) : 0.0;
      const double lhs = 0.5 * ((1 - std::sqrt(x)) * (1 - y) + (1 - x) * (1 - std::sqrt(y)));
      const double rhs = 1 - 0.5 * (std::sqrt(x) + std::sqrt(y));
      std::ostringstream what;
      what << "x=" << x << " y=" << y;
      record(r, lhs - rhs - 1e-15, what.str());
    }
  }
  r.details = {{"grid", grid}, {"max_lhs_minus_rhs", r.worst}};
  finish(r);
  return r;
}

SuiteReport suite_lemma76(int tuples, std::uint64_t seed) {
  SuiteReport r;
  r.name = "lemma76";
  r.worst = -1.0;
  Philox rng(seed, 0x76, 0);
  for (int i = 0; i < tuples; ++i) {
    const Index n1 = uniform_int(rng, 2, 400);
    const Index n2 = uniform_int(rng, 2, 400);
    const Index t1 = uniform_int(rng, 1, n1);
    const Index t2 = uniform_int(rng, 1, n2);
    const Index d1 = uniform_int(rng, 1, n1);
    const Index d2 = uniform_int(rng, 1, n2);
    const Index j = t1 + uniform_int(rng, 0, d1);
    const Index k = t2 + uniform_int(rng, 0, d2);
    const double a = static_cast<double>(j - t1), b = static_cast<double>(k - t2);
    const double lhs = std::sqrt(a / n1 + b / n2);
    const double rhs = (std::sqrt(a / d1) + std::sqrt(b / d2)) * std::sqrt(static_cast<double>(d1) / n1 +
                                                                        static_cast<double>(d2) / n2);
    std::ostringstream what;
    what << "n=(" << n1 << "," << n2 << ") t=(" << t1 << "," << t2 << ") d=(" << d1 << "," << d2 << ") j,k="
         << at(j, k);
    record(r, lhs - rhs * (1.0 + 1e-12), what.str());
  }
  r.details = {{"tuples", tuples}, {"max_lhs_minus_rhs", r.worst}};
  finish(r);
  return r;
}

SuiteReport suite_lemma77(int triples, std::uint64_t seed) {
  SuiteReport r;
  r.name = "lemma77";
  r.worst = -1.0;
  Philox rng(seed, 0x77, 0);
  for (int i = 0; i < triples; ++i) {
    const Index m = uniform_int(rng, 2, 50);
    const Index du = uniform_int(rng, 1, m);
    const Index dw = uniform_int(rng, 1, m);
    Matrix u(m, du), w(m, dw);
    for (Index e = 0; e < u.size(); ++e) u.data()[e] = rng.normal();
    for (Index e = 0; e < w.size(); ++e) w.data()[e] = rng.normal();
    Vector z(m);
    for (Index e = 0; e < m; ++e) z(e) = rng.normal();
    const Matrix qu = orthonormal_basis(u);
    const Matrix qw = orthonormal_basis(w);
    const Matrix pw = qw * qw.transpose();
    const Matrix qut = orthonormal_basis(pw * u);
    const double lhs = residual_norm(qut, pw * z);
    const double rhs = residual_norm(qu, z);
    record(r, lhs - rhs - 1e-10 * (1.0 + z.norm()),
           "triple " + std::to_string(i) + " (m=" + std::to_string(m) + ", dim U=" + std::to_string(du) +
               ", dim W=" + std::to_string(dw) + ")");
  }
  r.details = {{"triples", triples}, {"max_lhs_minus_rhs", r.worst}};
  finish(r);
  return r;
}

SuiteReport suite_antiprojections() {
  SuiteReport r;
  r.name = "antiprojections";
  r.worst = -1.0;
  const Index n1 = 24, n2 = 24;
  const ActiveSet s{{{7, 7}, {18, 7}, {7, 18}, {18, 18}}};
  const Tessellation tess = build_tessellation(s, n1, n2);
  const DerivativeField plain = antiprojection_field(s, n1, n2, false);
  const DerivativeField centered = antiprojection_field(s, n1, n2, true);
  for (const Cell& c : tess.cells) {
    for (Index j = c.lo1; j <= c.hi1; ++j) {
      for (Index k = c.lo2; k <= c.hi2; ++k) {
        const double bound = static_cast<double>(std::abs(j - c.jump.j)) / n1 +
                             static_cast<double>(std::abs(k - c.jump.k)) / n2;
        record(r, plain.at(j, k) - bound - 1e-12, "plain atom " + at(j, k) + " in the rectangle of " +
                                                      at(c.jump.j, c.jump.k));
        record(r, centered.at(j, k) - plain.at(j, k) - 1e-12, "centered atom " + at(j, k));
      }
    }
  }
  r.details = {{"n1", n1}, {"n2", n2}, {"s", s.size()}, {"max_residual", plain.matrix().maxCoeff()}};
  finish(r);
  return r;
}

SuiteReport suite_mesh() {
  SuiteReport r;
  r.name = "mesh";
  r.worst = -1.0;
  const MeshGrid g = build_mesh_grid(3, 4, 30, 51);
  const double bound = mesh_antiprojection_bound(3, 4);
  const DerivativeField plain = antiprojection_field(g.s_m, 30, 51, false);
  const DerivativeField centered = antiprojection_field(g.s_m, 30, 51, true);
  for (Index j = 2; j <= 30; ++j) {
    for (Index k = 2; k <= 51; ++k) {
      record(r, plain.at(j, k) - bound - 1e-12, "plain atom " + at(j, k));
      record(r, centered.at(j, k) - bound - 1e-12, "centered atom " + at(j, k));
    }
  }
  r.details = {{"size_before", g.size_before}, {"size_after", g.size_after}, {"bound", bound},
               {"max_residual", plain.matrix().maxCoeff()}};
  finish(r);
  return r;
}

SuiteReport suite_sandwich(int restarts, std::uint64_t seed) {
  SuiteReport r;
  r.name = "sandwich";
  r.worst = -1.0;
  const ActiveSet s{{{4, 4}, {9, 4}, {4, 9}, {9, 9}}};
  const Tessellation tess = build_tessellation(s, 12, 12);
  const WeightField weights = noise_weights(tess);
  const double bound = std::sqrt(gamma_bound_formula(tess));
  json rows = json::array();
  const std::size_t m = tess.cells.size();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    SignConfig q(m);
    for (std::size_t i = 0; i < m; ++i) q[i] = (mask >> i) & 1u ? -1 : 1;
    const double exact = std::sqrt(gamma_exact_from_w(interpolating_matrix(tess, weights, q)));
    const double sampled =
        effective_sparsity_sampled(s, weights.v, sign_field(tess, q), SparsitySampleOptions{restarts, 30, seed + mask});
    record(r, sampled - exact - 1e-9, "sign mask " + std::to_string(mask) + ": sampled above certified");
    record(r, exact - bound - 1e-9, "sign mask " + std::to_string(mask) + ": certified above formula");
    rows.push_back({{"mask", mask}, {"sampled", sampled}, {"certified", exact}, {"formula", bound}});
  }
  r.details = {{"restarts", restarts}, {"configurations", rows}};
  finish(r);
  return r;
}

SuiteReport suite_solver(std::uint64_t seed) {
  SuiteReport r;
  r.name = "solver";
  Philox rng(seed, 0x501, 0);
  double agreement = 0.0, kkt = 0.0;
  for (int i = 0; i < 20; ++i) {
    const Image y(double_center(random_image(rng, 8, 8).matrix()));
    for (double lambda : {0.01, 0.1, 1.0}) {
      const std::string tag = "input " + std::to_string(i) + ", lambda " + std::to_string(lambda);
      const InteractionLassoResult fit = interaction_lasso(y, lambda);
      const double diff = max_abs_diff(fit.estimate, analysis_oracle_solve(y, lambda));
      agreement = std::max(agreement, diff);
      record(r, diff - kSolverTol, tag + ": synthesis and analysis disagree");
      const double cert = std::max(fit.kkt_residual, kkt_certify(y, fit.estimate, lambda));
      kkt = std::max(kkt, cert);
      record(r, (fit.converged ? cert : 1.0) - kSolverTol, tag + ": KKT not certified");
    }
  }
  // Larger inputs, both penalty scalings.
  for (Index n : {32, 64}) {
    const Image y(double_center(random_image(rng, n, n).matrix()));
    const double lambda = paper_sim_lambda(1.0, static_cast<double>(n * n));
    for (PenaltyScaling scaling : {PenaltyScaling::kPlain, PenaltyScaling::kStandardized}) {
      InteractionLassoOptions opts;
      opts.scaling = scaling;
      const InteractionLassoResult fit = interaction_lasso(y, 0.5 * lambda, opts);
      kkt = std::max(kkt, fit.kkt_residual);
      record(r, (fit.converged ? fit.kkt_residual : 1.0) - kSolverTol, std::to_string(n) + "x" + std::to_string(n) +
                                                                           ": KKT not certified");
    }
  }
  // Null threshold: exactly zero at and above lambda_max.
  bool null_exact = true;
  for (int i = 0; i < 10; ++i) {
    const Image y(double_center(random_image(rng, 12, 10).matrix()));
    const double lmax = interaction_lambda_max(y);
    for (double factor : {1.0, 1.5}) {
      const InteractionLassoResult fit = interaction_lasso(y, factor * lmax);
      const bool zero = max_abs(fit.estimate) == 0.0 && fit.beta().l1() == 0.0;
      null_exact = null_exact && zero;
      record(r, zero ? -1.0 : 1.0, "null threshold: nonzero solution at " + std::to_string(factor) + " lambda_max");
    }
    const InteractionLassoResult below = interaction_lasso(y, 0.99 * lmax);
    record(r, below.beta().l1() > 0.0 ? -1.0 : 1.0, "null threshold: zero solution below lambda_max");
  }
  r.worst = std::max(agreement, kkt);
  r.details = {{"max_agreement_error", agreement}, {"max_kkt_residual", kkt}, {"null_threshold_exact", null_exact},
               {"tolerance", kSolverTol}};
  finish(r);
  return r;
}

SuiteReport suite_oracle_mc(int reps, std::uint64_t seed) {
  SuiteReport r;
  r.name = "oracle-mc";
  json rows = json::array();
  const std::pair<OracleTheorem, Index> runs[] = {
      {OracleTheorem::kThm4, 32}, {OracleTheorem::kFastMain, 32}, {OracleTheorem::kSlowMesh, 40}};
  for (const auto& [theorem, n1] : runs) {
    OracleMcConfig cfg;
    cfg.theorem = theorem;
    cfg.n1 = n1;
    cfg.reps = reps;
    cfg.seed = seed;
    const OracleMcResult res = verify_oracle_bound(cfg);
    r.worst = std::max(r.worst, res.rate());
    record(r, res.rate() - 0.05, to_string(theorem) + ": violation rate " + std::to_string(res.rate()) + " above 5%");
    rows.push_back({{"theorem", to_string(theorem)},
                    {"n1", n1},
                    {"reps", res.reps},
                    {"lambda", res.lambda},
                    {"lambda_displayed", res.lambda_displayed},
                    {"rhs", res.rhs},
                    {"mean_mse", res.mean_mse},
                    {"max_mse", res.max_mse},
                    {"violations", res.violations},
                    {"failures", res.failures},
                    {"rate", res.rate()},
                    {"probability", res.probability}});
  }
  r.details = {{"gate", 0.05}, {"runs", rows}};
  finish(r);
  return r;
}

SuiteReport suite_rate(const SimConfig& cfg, double lo, double hi) {
  SuiteReport r;
  r.name = "rate";
  const SimResult res = run_rate_simulation(cfg);
  r.worst = res.slope;
  std::ostringstream what;
  what << "slope " << res.slope << " outside [" << lo << ", " << hi << "]";
  ++r.checks;
  if (!(res.slope >= lo && res.slope <= hi)) {
    ++r.violations;
    r.first_failure = what.str();
  }
  int failures = 0;
  for (const SizeStats& s : res.per_size) failures += s.failures;
  ++r.checks;
  if (failures > 0) {
    ++r.violations;
    if (r.first_failure.empty()) r.first_failure = std::to_string(failures) + " solves failed";
  }
  r.details = simulation_summary(cfg, res);
  r.details["gate"] = {lo, hi};
  finish(r);
  return r;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"identities", "lemma75", "lemma76", "lemma77", "antiprojections",
                                              "mesh",       "sandwich", "solver", "oracle-mc", "rate"};
  return names;
}

SuiteReport run_suite(const std::string& name, std::uint64_t seed) {
  if (name == "identities") return suite_identities(100, seed);
  if (name == "lemma75") return suite_lemma75();
  if (name == "lemma76") return suite_lemma76(1000, seed);
  if (name == "lemma77") return suite_lemma77(100, seed);
  if (name == "antiprojections") return suite_antiprojections();
  if (name == "mesh") return suite_mesh();
  if (name == "sandwich") return suite_sandwich(10000, seed);
  if (name == "solver") return suite_solver(seed);
  if (name == "oracle-mc") return suite_oracle_mc(100, seed);
  if (name == "rate") return suite_rate(SimConfig{});
  throw DomainError("unknown suite '" + name + "'");
}

}  // namespace tvd
