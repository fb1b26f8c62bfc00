#include "tvd/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "tvd/fused_lasso.hpp"

namespace tvd {

namespace {

constexpr Index kPolishMaxSupport = 1500;
constexpr int kInnerSweeps = 200;
constexpr int kPolishEvery = 5;

double soft_threshold(double x, double t) {
  if (x > t) return x - t;
  if (x < -t) return x + t;
  return 0.0;
}

double sign(double x) { return (x > 0.0) - (x < 0.0); }

void require_finite_nonnegative(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    throw DomainError(std::string(name) + " must be finite and non-negative");
  }
}

void require_interaction_input(const Image& y) {
  if (y.rows() < 2 || y.cols() < 2) {
    throw DimensionError("interaction problems need n1 >= 2 and n2 >= 2");
  }
  if (!y.all_finite()) throw DomainError("input image has non-finite entries");
  const double scale = 1.0 + max_abs(y);
  const double allowed = 1e-8 * scale * static_cast<double>(std::max(y.rows(), y.cols()));
  if (centering_defect(y) > allowed) {
    throw DomainError("input is not doubly centered (row/column sums must vanish)");
  }
}

// Distance of the normalized correlation g to lambda*sign(beta) (active) or
// to [-lambda, lambda] (inactive), maximized over coordinates.
double kkt_violation(const Matrix& g, const Matrix& beta, const Matrix& lambda) {
  double worst = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    const double b = beta.data()[i];
    const double gi = g.data()[i];
    const double li = lambda.data()[i];
    const double v = b != 0.0 ? std::abs(gi - li * sign(b)) : std::max(0.0, std::abs(gi) - li);
    worst = std::max(worst, v);
  }
  return worst;
}

struct Coord {
  Index a;  // 0-based row slot, atom row index j = a + 2
  Index b;
};

class LassoState {
 public:
  LassoState(const Image& y, Matrix lambda, const InteractionGram& gram)
      : y_(y), lambda_(std::move(lambda)), gram_(gram), n_(static_cast<double>(y.size())) {
    beta_ = Matrix::Zero(y.rows() - 1, y.cols() - 1);
    g_ = beta_;
  }

  Matrix& beta() { return beta_; }
  const Matrix& g() const { return g_; }

  double gram(const Coord& p, const Coord& q) const {
    return gram_(AtomIndex{p.a + 2, p.b + 2}, AtomIndex{q.a + 2, q.b + 2});
  }

  // Exact gradient from the residual; O(n1 n2).
  void refresh_gradient() {
    Image r = y_ - synthesize_interactions(DerivativeField(beta_));
    g_ = interaction_correlations(r).matrix() / n_;
  }

  double objective() const {
    const DerivativeField field(beta_);
    const Image r = y_ - synthesize_interactions(field);
    return squared_norm(r) / n_ + 2.0 * lambda_.cwiseProduct(beta_.cwiseAbs()).sum();
  }

  // beta_i += delta, keeping g exact on the working set.
  void move(const Coord& i, double delta, const std::vector<Coord>& working) {
    beta_(i.a, i.b) += delta;
    for (const Coord& w : working) g_(w.a, w.b) -= delta * gram(w, i) / n_;
  }

  void sweep(const std::vector<Coord>& working) {
    for (const Coord& i : working) {
      const double gii = gram(i, i);
      const double old = beta_(i.a, i.b);
      const double c = n_ * g_(i.a, i.b) + gii * old;
      const double next = soft_threshold(c, n_ * lambda_(i.a, i.b)) / gii;
      if (next != old) move(i, next - old, working);
    }
  }

  double working_violation(const std::vector<Coord>& working) const {
    double worst = 0.0;
    for (const Coord& i : working) {
      const double b = beta_(i.a, i.b);
      const double gi = g_(i.a, i.b);
      const double li = lambda_(i.a, i.b);
      const double v = b != 0.0 ? std::abs(gi - li * sign(b)) : std::max(0.0, std::abs(gi) - li);
      worst = std::max(worst, v);
    }
    return worst;
  }

  // Newton step on the support with signs held fixed, truncated at the first
  // sign change. The objective is a convex quadratic along the segment with
  // its minimum at the full step, so any truncation still decreases it.
  void polish(const std::vector<Coord>& working) {
    std::vector<Coord> support;
    for (const Coord& w : working) {
      if (beta_(w.a, w.b) != 0.0) support.push_back(w);
    }
    const Index m = static_cast<Index>(support.size());
    if (m == 0 || m > kPolishMaxSupport) return;
    Matrix gaa(m, m);
    Vector rhs(m);
    for (Index p = 0; p < m; ++p) {
      for (Index q = p; q < m; ++q) gaa(p, q) = gaa(q, p) = gram(support[p], support[q]);
      const Coord& c = support[p];
      rhs(p) = n_ * (g_(c.a, c.b) - lambda_(c.a, c.b) * sign(beta_(c.a, c.b)));
    }
    Eigen::LDLT<Matrix> ldlt(gaa);
    if (ldlt.info() != Eigen::Success) return;
    const Vector delta = ldlt.solve(rhs);
    if (!delta.allFinite()) return;

    double step = 1.0;
    Index blocking = -1;
    for (Index p = 0; p < m; ++p) {
      const double b = beta_(support[p].a, support[p].b);
      const double next = b + delta(p);
      if (sign(next) != sign(b)) {
        const double t = -b / delta(p);
        if (t < step) {
          step = t;
          blocking = p;
        }
      }
    }
    const double before = objective();
    const Matrix saved_beta = beta_;
    const Matrix saved_g = g_;
    for (Index p = 0; p < m; ++p) {
      const Coord& c = support[p];
      double d = step * delta(p);
      if (p == blocking) d = -beta_(c.a, c.b);
      move(c, d, working);
    }
    // Guard against round-off on nearly singular supports.
    if (objective() > before) {
      beta_ = saved_beta;
      g_ = saved_g;
    }
  }

 private:
  const Image& y_;
  Matrix lambda_;
  const InteractionGram& gram_;
  double n_;
  Matrix beta_;
  Matrix g_;
};

}  // namespace

void TuningConfig::validate() const {
  require_finite_nonnegative(lambda, "lambda");
  require_finite_nonnegative(lambda1, "lambda1");
  require_finite_nonnegative(lambda2, "lambda2");
  require_finite_nonnegative(sigma, "sigma");
  if (!(confidence_x > 0.0) || !std::isfinite(confidence_x)) throw DomainError("confidence x must be positive");
  if (!(confidence_t > 0.0) || !std::isfinite(confidence_t)) throw DomainError("confidence t must be positive");
}

double default_main_effect_lambda(double sigma, Index n_axis, Index n_other) {
  if (n_axis < 1 || n_other < 1) throw DimensionError("main-effect lambda needs positive sizes");
  const double n = static_cast<double>(n_axis) * static_cast<double>(n_other);
  return sigma * std::sqrt(2.0 * std::log(2.0 * static_cast<double>(n_axis)) / n);
}

double interaction_objective(const Image& y_tilde, const Image& f, double lambda) {
  if (!y_tilde.same_shape(f)) throw DimensionError("objective: shape mismatch");
  return squared_norm(y_tilde - f) / static_cast<double>(f.size()) + 2.0 * lambda * tv(f);
}

double interaction_lambda_max(const Image& y_tilde) {
  return interaction_correlations(y_tilde).matrix().cwiseAbs().maxCoeff() /
         static_cast<double>(y_tilde.size());
}

Matrix interaction_penalty_weights(Index n1, Index n2, PenaltyScaling scaling) {
  if (n1 < 2 || n2 < 2) throw DimensionError("interaction problems need n1 >= 2 and n2 >= 2");
  Matrix w = Matrix::Ones(n1 - 1, n2 - 1);
  if (scaling == PenaltyScaling::kStandardized) {
    const InteractionGram gram(n1, n2);
    const double n = static_cast<double>(n1 * n2);
    for (Index b = 0; b < n2 - 1; ++b)
      for (Index a = 0; a < n1 - 1; ++a) w(a, b) = std::sqrt(gram.diagonal({a + 2, b + 2}) / n);
  }
  return w;
}

InteractionLassoResult interaction_lasso(const Image& y_tilde, double lambda,
                                         const InteractionLassoOptions& options) {
  require_interaction_input(y_tilde);
  require_finite_nonnegative(lambda, "lambda");
  const Index n1 = y_tilde.rows();
  const Index n2 = y_tilde.cols();
  const long max_sweeps = options.max_sweeps > 0 ? options.max_sweeps : 50L * n1 * n2;

  InteractionLassoResult result;
  const InteractionGram gram(n1, n2);
  const Matrix lambdas = lambda * interaction_penalty_weights(n1, n2, options.scaling);
  LassoState state(y_tilde, lambdas, gram);

  const Matrix g0 = interaction_correlations(y_tilde).matrix() / static_cast<double>(n1 * n2);
  const bool null_model = (g0.cwiseAbs().array() <= lambdas.array()).all();
  if (lambda == 0.0) {
    state.beta() = total_derivative(y_tilde).matrix();
  } else if (null_model) {
    // beta stays zero
  } else {
    if (options.warm_start) {
      if (options.warm_start->image_rows() != n1 || options.warm_start->image_cols() != n2) {
        throw DimensionError("warm start shape mismatch");
      }
      state.beta() = options.warm_start->matrix();
    }
    long sweeps = 0;
    while (true) {
      state.refresh_gradient();
      if (kkt_violation(state.g(), state.beta(), lambdas) <= options.tol || sweeps >= max_sweeps) break;

      std::vector<Coord> working;
      const Matrix& g = state.g();
      for (Index b = 0; b < n2 - 1; ++b) {
        for (Index a = 0; a < n1 - 1; ++a) {
          if (state.beta()(a, b) != 0.0 || std::abs(g(a, b)) > lambdas(a, b)) working.push_back({a, b});
        }
      }
      for (int inner = 0; inner < kInnerSweeps && sweeps < max_sweeps; ++inner) {
        state.sweep(working);
        ++sweeps;
        if ((inner + 1) % kPolishEvery == 0) state.polish(working);
        if (options.record_objective) result.objective_trace.push_back(state.objective());
        if (state.working_violation(working) <= 0.25 * options.tol) break;
      }
      state.polish(working);
      if (options.record_objective) result.objective_trace.push_back(state.objective());
    }
    result.sweeps = sweeps;
  }

  const DerivativeField beta(state.beta());
  result.estimate = synthesize_interactions(beta);
  result.coefficients = CoefficientField(n1, n2);
  result.coefficients.set_interaction_block(beta);
  state.refresh_gradient();
  result.kkt_residual = kkt_violation(state.g(), state.beta(), lambdas);
  result.objective = state.objective();
  result.converged = result.kkt_residual <= options.tol;
  return result;
}

AnalysisOracleResult analysis_oracle_solve_report(const Image& y_tilde, double lambda) {
  if (y_tilde.rows() > kAnalysisOracleMaxSide || y_tilde.cols() > kAnalysisOracleMaxSide) {
    throw SizeCapError("analysis oracle is limited to " + std::to_string(kAnalysisOracleMaxSide) +
                       "x" + std::to_string(kAnalysisOracleMaxSide) + " grids");
  }
  require_interaction_input(y_tilde);
  require_finite_nonnegative(lambda, "lambda");
  AnalysisOracleResult out;
  if (lambda == 0.0) {
    out.estimate = y_tilde;
    return out;
  }
  const Index n1 = y_tilde.rows();
  const Index n2 = y_tilde.cols();
  const double n = static_cast<double>(n1 * n2);
  const Index k = (n1 - 1) * (n2 - 1);

  // Dense Delta^T: column i is the adjoint image of the i-th unit field.
  Matrix adj(n1 * n2, k);
  for (Index i = 0; i < k; ++i) {
    DerivativeField e(n1, n2);
    e.matrix().data()[i] = 1.0;
    const Image col = adjoint_derivative(e);
    adj.col(i) = Eigen::Map<const Vector>(col.matrix().data(), n1 * n2);
  }
  const Matrix m = adj.transpose() * adj;
  const DerivativeField dy = total_derivative(y_tilde);
  const Vector b = Eigen::Map<const Vector>(dy.matrix().data(), k) / (n * lambda);

  // min 1/2 q^T M q - b^T q over |q| <= 1. Accelerated projected gradient
  // for a good starting point; ||M|| <= 16.
  const double step = 1.0 / 16.0;
  Vector q = Vector::Zero(k);
  Vector z = q;
  double t = 1.0;
  for (int it = 0; it < 3000; ++it) {
    const Vector next = (z - step * (m * z - b)).cwiseMax(-1.0).cwiseMin(1.0);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / tn) * (next - q);
    q = next;
    t = tn;
  }

  // Primal active-set finish: bound set W, free set F; each iterate is
  // feasible and the objective never increases.
  std::vector<int> at_bound(k, 0);  // -1, 0 or +1
  for (Index i = 0; i < k; ++i) {
    if (q(i) >= 1.0 - 1e-9) {
      q(i) = 1.0;
      at_bound[i] = 1;
    } else if (q(i) <= -1.0 + 1e-9) {
      q(i) = -1.0;
      at_bound[i] = -1;
    }
  }
  for (int it = 0; it < 20 * static_cast<int>(k) + 100; ++it) {
    const Vector grad = m * q - b;
    std::vector<Index> free;
    for (Index i = 0; i < k; ++i)
      if (at_bound[i] == 0) free.push_back(i);
    const Index nf = static_cast<Index>(free.size());
    Vector p = Vector::Zero(k);
    if (nf > 0) {
      Matrix mff(nf, nf);
      Vector rf(nf);
      for (Index r = 0; r < nf; ++r) {
        for (Index c = 0; c < nf; ++c) mff(r, c) = m(free[r], free[c]);
        rf(r) = -grad(free[r]);
      }
      const Vector pf = mff.ldlt().solve(rf);
      for (Index r = 0; r < nf; ++r) p(free[r]) = pf(r);
    }
    if (p.cwiseAbs().maxCoeff() <= 1e-14) {
      // Stationary on the face; release the worst bound with a wrong-sign multiplier.
      Index release = -1;
      double worst = 1e-13;
      for (Index i = 0; i < k; ++i) {
        if (at_bound[i] == 0) continue;
        const double v = at_bound[i] * grad(i);  // must be <= 0 at the optimum
        if (v > worst) {
          worst = v;
          release = i;
        }
      }
      if (release < 0) break;
      at_bound[release] = 0;
      continue;
    }
    double alpha = 1.0;
    Index blocking = -1;
    for (Index i = 0; i < k; ++i) {
      if (p(i) > 0.0 && q(i) + p(i) > 1.0) {
        const double a = (1.0 - q(i)) / p(i);
        if (a < alpha) { alpha = a; blocking = i; }
      } else if (p(i) < 0.0 && q(i) + p(i) < -1.0) {
        const double a = (-1.0 - q(i)) / p(i);
        if (a < alpha) { alpha = a; blocking = i; }
      }
    }
    q += alpha * p;
    if (blocking >= 0) {
      at_bound[blocking] = p(blocking) > 0.0 ? 1 : -1;
      q(blocking) = at_bound[blocking];
    }
  }

  const Vector f = Eigen::Map<const Vector>(y_tilde.matrix().data(), n1 * n2) - n * lambda * (adj * q);
  out.estimate = Image(Matrix(Eigen::Map<const Matrix>(f.data(), n1, n2)));
  const double primal = interaction_objective(y_tilde, out.estimate, lambda);
  const Vector atq = adj * q;
  const double dual = 2.0 * lambda * n * lambda * b.dot(q) - n * lambda * lambda * atq.squaredNorm();
  out.duality_gap = std::max(0.0, primal - dual);
  return out;
}

Image analysis_oracle_solve(const Image& y_tilde, double lambda) {
  return analysis_oracle_solve_report(y_tilde, lambda).estimate;
}

double kkt_certify(const Image& y_tilde, const Image& f_hat, double lambda) {
  if (!y_tilde.same_shape(f_hat)) throw DimensionError("kkt_certify: shape mismatch");
  if (y_tilde.rows() < 2 || y_tilde.cols() < 2) throw DimensionError("kkt_certify needs a 2x2 image");
  require_finite_nonnegative(lambda, "lambda");
  const double n = static_cast<double>(y_tilde.size());
  const Image r = y_tilde - f_hat;
  const double off_subspace = max_abs_diff(r, Image(double_center(r.matrix()))) / n;
  if (lambda == 0.0) return max_abs(r) / n;

  const Matrix g = interaction_correlations(r).matrix() / n;
  const Matrix d = total_derivative(f_hat).matrix();
  const double active = 1e-10 * (1.0 + d.cwiseAbs().maxCoeff());
  double worst = 0.0;
  for (Index i = 0; i < g.size(); ++i) {
    const double di = d.data()[i];
    const double gi = g.data()[i];
    const double v =
        std::abs(di) > active ? std::abs(gi - lambda * sign(di)) : std::max(0.0, std::abs(gi) - lambda);
    worst = std::max(worst, v);
  }
  return std::max(worst, off_subspace);
}

double denoise_objective(const Image& y, const Image& f, const TuningConfig& cfg) {
  if (!y.same_shape(f)) throw DimensionError("objective: shape mismatch");
  return squared_norm(y - f) / static_cast<double>(y.size()) + 2.0 * cfg.lambda * tv(f) +
         2.0 * cfg.lambda1 * tv1(f) + 2.0 * cfg.lambda2 * tv2(f);
}

DenoiseResult denoise(const Image& y, const TuningConfig& cfg, const DenoiseOptions& options) {
  cfg.validate();
  if (y.rows() < 2 || y.cols() < 2) throw DimensionError("denoise needs n1 >= 2 and n2 >= 2");
  if (!y.all_finite()) throw DomainError("input image has non-finite entries");
  const AnovaParts parts = anova_decompose(y);

  DenoiseResult out;
  out.estimate.global_mean = parts.global_mean;
  Vector rows = fused_lasso_1d(parts.row_effects, cfg.lambda1);
  rows.array() -= rows.mean();
  Vector cols = fused_lasso_1d(parts.col_effects, cfg.lambda2);
  cols.array() -= cols.mean();
  out.estimate.row_effects = rows;
  out.estimate.col_effects = cols;

  const InteractionLassoResult inter = interaction_lasso(parts.interactions, cfg.lambda, options.interaction);
  out.estimate.interactions = inter.estimate;
  out.kkt_residual = inter.kkt_residual;
  out.iterations = inter.sweeps;
  out.converged = inter.converged;
  out.objective = denoise_objective(y, out.image(), cfg);
  return out;
}

}  // namespace tvd
