#include "tvd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "tvd/core.hpp"
#include "tvd/rng.hpp"

namespace tvd {

namespace {

std::string pair_name(AtomIndex a) { return "(" + std::to_string(a.j) + "," + std::to_string(a.k) + ")"; }

struct Region {
  Index lo1, hi1, lo2, hi2;
  std::vector<AtomIndex> jumps;
};

struct Gap {
  Index width = -1;
  Index low = 0;   // coordinate below the gap
  Index high = 0;  // coordinate above the gap
};

Gap widest_gap(const std::vector<AtomIndex>& jumps, bool rows) {
  std::vector<Index> coords;
  for (const AtomIndex& a : jumps) coords.push_back(rows ? a.j : a.k);
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  Gap best;
  for (std::size_t i = 1; i < coords.size(); ++i) {
    const Index w = coords[i] - coords[i - 1];
    if (w > best.width) best = {w, coords[i - 1], coords[i]};
  }
  return best;
}

void split(const Region& region, std::vector<Cell>& out) {
  if (region.jumps.size() == 1) {
    const AtomIndex t = region.jumps.front();
    if (!(region.lo1 < t.j && t.j < region.hi1 && region.lo2 < t.k && t.k < region.hi2)) {
      throw TessellationError("jump " + pair_name(t) + " is not interior to its rectangle");
    }
    out.push_back(Cell{t, region.lo1, region.hi1, region.lo2, region.hi2});
    return;
  }
  const Gap g1 = widest_gap(region.jumps, true);
  const Gap g2 = widest_gap(region.jumps, false);
  const bool use_rows = g1.width >= g2.width;
  const Gap g = use_rows ? g1 : g2;
  if (g.width < 2) {
    // Name the closest pair along the chosen axis.
    AtomIndex a{}, b{};
    bool found = false;
    for (const AtomIndex& p : region.jumps) {
      for (const AtomIndex& q : region.jumps) {
        if (!(p < q) || found) continue;
        const Index dp = use_rows ? std::abs(p.j - q.j) : std::abs(p.k - q.k);
        if (dp < 2) {
          a = p;
          b = q;
          found = true;
        }
      }
    }
    throw TessellationError("no rectangular split separates jumps " + pair_name(a) + " and " + pair_name(b));
  }
  const Index mid = (g.low + g.high) / 2;
  Region lower = region;
  Region upper = region;
  lower.jumps.clear();
  upper.jumps.clear();
  if (use_rows) {
    lower.hi1 = mid;
    upper.lo1 = mid;
  } else {
    lower.hi2 = mid;
    upper.lo2 = mid;
  }
  for (const AtomIndex& p : region.jumps) {
    const Index c = use_rows ? p.j : p.k;
    (c <= g.low ? lower : upper).jumps.push_back(p);
  }
  split(lower, out);
  split(upper, out);
}

double log_e(double x) { return 1.0 + std::log(x); }

// Orthonormal basis of the span of the given atoms, as columns of Q.
Matrix atom_basis(const ActiveSet& s, Index n1, Index n2, bool centered) {
  Matrix a(n1 * n2, s.size());
  for (Index m = 0; m < s.size(); ++m) {
    const Image psi = centered ? centered_atom(s.jumps[m], n1, n2) : atom(s.jumps[m], n1, n2);
    a.col(m) = Eigen::Map<const Vector>(psi.matrix().data(), n1 * n2);
  }
  if (s.size() == 0) return Matrix(n1 * n2, 0);
  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const Index rank = qr.rank();
  Matrix q = qr.householderQ() * Matrix::Identity(n1 * n2, rank);
  return q;
}

}  // namespace

bool ActiveSet::contains(AtomIndex idx) const {
  return std::find(jumps.begin(), jumps.end(), idx) != jumps.end();
}

void validate_active_set(const ActiveSet& s, Index n1, Index n2) {
  std::set<AtomIndex> seen;
  for (const AtomIndex& t : s.jumps) {
    if (t.j < 3 || t.j > n1 - 1 || t.k < 3 || t.k > n2 - 1) {
      throw DomainError("jump " + pair_name(t) + " outside [3:" + std::to_string(n1 - 1) + "]x[3:" +
                        std::to_string(n2 - 1) + "]");
    }
    if (!seen.insert(t).second) throw DomainError("duplicate jump " + pair_name(t));
  }
}

ActiveSet active_set_of(const Image& f, double threshold) {
  const DerivativeField d = total_derivative(f);
  ActiveSet s;
  for (Index k = 2; k <= f.cols(); ++k)
    for (Index j = 2; j <= f.rows(); ++j)
      if (std::abs(d.at(j, k)) > threshold) s.jumps.push_back({j, k});
  return s;
}

double universal_lambda(double sigma, double n, double t) {
  return sigma * std::sqrt((2.0 * std::log(2.0 * n) + 2.0 * t) / n);
}

double thm4_lambda(double s, double sigma, double n) {
  return 4.0 * sigma * std::sqrt(std::log(2.0 * n) / (n * std::sqrt(s)));
}

double paper_sim_lambda(double sigma, double n) { return sigma * std::sqrt(std::log(2.0 * n) / (2.0 * n)); }

std::array<double, 4> Cell::areas() const {
  const auto d = [](Index a) { return static_cast<double>(a); };
  return {d(d1_minus()) * d(d2_minus()), d(d1_minus()) * d(d2_plus()), d(d1_plus()) * d(d2_plus()),
          d(d1_plus()) * d(d2_minus())};
}

Index Tessellation::d1_max() const {
  Index m = 0;
  for (const Cell& c : cells) m = std::max({m, c.d1_minus(), c.d1_plus()});
  return m;
}

Index Tessellation::d2_max() const {
  Index m = 0;
  for (const Cell& c : cells) m = std::max({m, c.d2_minus(), c.d2_plus()});
  return m;
}

Tessellation build_tessellation(const ActiveSet& s, Index n1, Index n2) {
  if (s.size() == 0) throw DomainError("tessellation needs at least one jump");
  validate_active_set(s, n1, n2);
  Tessellation tess{n1, n2, {}};
  split(Region{2, n1, 2, n2, s.jumps}, tess.cells);
  return tess;
}

std::string check_tessellation(const Tessellation& tess) {
  const Index n1 = tess.n1;
  const Index n2 = tess.n2;
  for (const Cell& c : tess.cells) {
    if (c.lo1 < 2 || c.hi1 > n1 || c.lo2 < 2 || c.hi2 > n2 || c.lo1 > c.hi1 || c.lo2 > c.hi2) {
      return "rectangle of jump " + pair_name(c.jump) + " leaves [2:n1]x[2:n2]";
    }
    if (!(c.lo1 < c.jump.j && c.jump.j < c.hi1 && c.lo2 < c.jump.k && c.jump.k < c.hi2)) {
      return "jump " + pair_name(c.jump) + " is not interior";
    }
  }
  for (Index j = 2; j <= n1; ++j) {
    for (Index k = 2; k <= n2; ++k) {
      int covering = 0;
      int interior = 0;
      for (const Cell& c : tess.cells) {
        if (!c.contains(j, k)) continue;
        ++covering;
        if (c.lo1 < j && j < c.hi1 && c.lo2 < k && k < c.hi2) ++interior;
      }
      if (covering == 0) return "point " + pair_name({j, k}) + " is not covered";
      if (interior > 0 && covering > 1) return "point " + pair_name({j, k}) + " is interior to an overlap";
    }
  }
  return {};
}

double quadrant_weight(double x, double y) {
  return 1.0 - 0.5 * (1.0 - std::sqrt(x)) * (1.0 - y) - 0.5 * (1.0 - x) * (1.0 - std::sqrt(y));
}

WeightField noise_weights(const Tessellation& tess) {
  const Index n1 = tess.n1;
  const Index n2 = tess.n2;
  WeightField out{DerivativeField(n1, n2, 1.0),
                  DerivativeField(n1, n2, std::numeric_limits<double>::infinity()),
                  2.0 * std::sqrt(static_cast<double>(tess.d1_max()) / static_cast<double>(n1) +
                                  static_cast<double>(tess.d2_max()) / static_cast<double>(n2))};
  for (const Cell& c : tess.cells) {
    for (Index j = c.lo1; j <= c.hi1; ++j) {
      for (Index k = c.lo2; k <= c.hi2; ++k) {
        const Index dj = std::abs(j - c.jump.j);
        const Index dk = std::abs(k - c.jump.k);
        const double d1 = static_cast<double>(j < c.jump.j ? c.d1_minus() : c.d1_plus());
        const double d2 = static_cast<double>(k < c.jump.k ? c.d2_minus() : c.d2_plus());
        out.v.at(j, k) = quadrant_weight(static_cast<double>(dj) / d1, static_cast<double>(dk) / d2);
        const double vt = std::sqrt(static_cast<double>(dj) / static_cast<double>(n1) +
                                    static_cast<double>(dk) / static_cast<double>(n2));
        out.v_tilde.at(j, k) = std::min(out.v_tilde.at(j, k), vt);
      }
    }
  }
  return out;
}

DerivativeField interpolating_matrix(const Tessellation& tess, const WeightField& weights, const SignConfig& signs) {
  if (signs.size() != tess.cells.size()) throw DimensionError("one sign per jump required");
  DerivativeField w(tess.n1, tess.n2);
  for (std::size_t m = 0; m < tess.cells.size(); ++m) {
    if (signs[m] != 1 && signs[m] != -1) throw DomainError("signs must be +1 or -1");
    const Cell& c = tess.cells[m];
    for (Index j = c.lo1; j <= c.hi1; ++j)
      for (Index k = c.lo2; k <= c.hi2; ++k) w.at(j, k) = signs[m] * (1.0 - weights.v.at(j, k));
  }
  return w;
}

DerivativeField sign_field(const Tessellation& tess, const SignConfig& signs) {
  if (signs.size() != tess.cells.size()) throw DimensionError("one sign per jump required");
  DerivativeField q(tess.n1, tess.n2);
  for (std::size_t m = 0; m < tess.cells.size(); ++m) q.at(tess.cells[m].jump.j, tess.cells[m].jump.k) = signs[m];
  return q;
}

double gamma_bound_from_areas(Index n1, Index n2, const std::vector<std::array<double, 4>>& areas) {
  const double n = static_cast<double>(n1) * static_cast<double>(n2);
  double sum = 0.0;
  for (const auto& a : areas)
    for (double d : a) sum += n / d;
  return 0.5 * (log_e(static_cast<double>(n1)) + log_e(static_cast<double>(n2))) * sum;
}

double gamma_bound_formula(const Tessellation& tess) {
  std::vector<std::array<double, 4>> areas;
  for (const Cell& c : tess.cells) areas.push_back(c.areas());
  return gamma_bound_from_areas(tess.n1, tess.n2, areas);
}

double thm4_gamma_squared(double s, double n) {
  const double root = std::sqrt(n) - 1.0;
  return 8.0 * s * s * n * (2.0 + std::log(n)) / (root * root);
}

double gamma_exact_from_w(const DerivativeField& w) {
  const double n = static_cast<double>(w.image_rows() * w.image_cols());
  return n * squared_norm(adjoint_derivative(w));
}

double effective_sparsity_sampled(const ActiveSet& s, const DerivativeField& v, const DerivativeField& q,
                                  const SparsitySampleOptions& options) {
  const Index n1 = v.image_rows();
  const Index n2 = v.image_cols();
  const double n = static_cast<double>(n1 * n2);
  // Coefficients: +-q on S; the discount 1 - v elsewhere.
  Matrix on_s = Matrix::Zero(n1 - 1, n2 - 1);
  for (const AtomIndex& t : s.jumps) on_s(t.j - 2, t.k - 2) = 1.0;
  const Matrix discount = (Matrix::Ones(n1 - 1, n2 - 1) - v.matrix()).cwiseProduct(
      Matrix::Ones(n1 - 1, n2 - 1) - on_s);

  const auto value = [&](const Matrix& d) {
    return (q.matrix().cwiseProduct(on_s).cwiseProduct(d)).sum() - discount.cwiseProduct(d.cwiseAbs()).sum();
  };
  const auto normalize = [&](Matrix& f) {
    const double norm = f.norm();
    if (norm > 0.0) f *= std::sqrt(n) / norm;
  };
  const auto ascend = [&](Matrix f) {
    normalize(f);
    double best = value(total_derivative(Image(f)).matrix());
    double step = 1.0;
    for (int it = 0; it < options.ascent_steps; ++it) {
      const Matrix d = total_derivative(Image(f)).matrix();
      Matrix g = q.matrix().cwiseProduct(on_s);
      for (Index i = 0; i < g.size(); ++i) {
        const double di = d.data()[i];
        g.data()[i] -= discount.data()[i] * ((di > 0.0) - (di < 0.0));
      }
      Matrix grad = adjoint_derivative(DerivativeField(g)).matrix();
      const double gnorm = grad.norm();
      if (gnorm == 0.0) break;
      Matrix next = f + step * std::sqrt(n) * grad / gnorm;
      normalize(next);
      const double val = value(total_derivative(Image(next)).matrix());
      if (val > best) {
        best = val;
        f = next;
      } else {
        step *= 0.5;
      }
    }
    return best;
  };

  double best = 0.0;  // constant image: Delta f = 0
  const Matrix certificate = adjoint_derivative(DerivativeField(Matrix(q.matrix().cwiseProduct(on_s)))).matrix();
  if (certificate.norm() > 0.0) best = std::max(best, ascend(certificate));
  Philox rng(options.seed, 0x5eed, static_cast<std::uint64_t>(n1 * 1000003 + n2));
  for (int r = 0; r < options.restarts; ++r) {
    Matrix f(n1, n2);
    for (Index i = 0; i < f.size(); ++i) f.data()[i] = rng.normal();
    best = std::max(best, ascend(f));
  }
  return best;
}

DerivativeField antiprojection_field(const ActiveSet& s, Index n1, Index n2, bool centered) {
  if (n1 > kAntiprojectionMaxSide || n2 > kAntiprojectionMaxSide) {
    throw SizeCapError("exact antiprojections are limited to " + std::to_string(kAntiprojectionMaxSide) + "x" +
                       std::to_string(kAntiprojectionMaxSide) + " grids");
  }
  const Matrix q = atom_basis(s, n1, n2, centered);
  const double n = static_cast<double>(n1 * n2);
  DerivativeField out(n1, n2);
  for (Index j = 2; j <= n1; ++j) {
    for (Index k = 2; k <= n2; ++k) {
      const Image psi = centered ? centered_atom({j, k}, n1, n2) : atom({j, k}, n1, n2);
      const Eigen::Map<const Vector> p(psi.matrix().data(), n1 * n2);
      const Vector r = p - q * (q.transpose() * p);
      out.at(j, k) = r.squaredNorm() / n;
    }
  }
  return out;
}

double antiprojection_exact(const ActiveSet& s, AtomIndex idx, Index n1, Index n2, bool centered) {
  if (n1 > kAntiprojectionMaxSide || n2 > kAntiprojectionMaxSide) {
    throw SizeCapError("exact antiprojections are limited to " + std::to_string(kAntiprojectionMaxSide) + "x" +
                       std::to_string(kAntiprojectionMaxSide) + " grids");
  }
  const Matrix q = atom_basis(s, n1, n2, centered);
  const Image psi = centered ? centered_atom(idx, n1, n2) : atom(idx, n1, n2);
  const Eigen::Map<const Vector> p(psi.matrix().data(), n1 * n2);
  const Vector r = p - q * (q.transpose() * p);
  return r.squaredNorm() / static_cast<double>(n1 * n2);
}

MeshGrid build_mesh_grid(Index t1, Index t2, Index n1, Index n2) {
  if (t1 < 1 || t2 < 1) throw DomainError("mesh grid needs t1, t2 >= 1");
  const Index p1 = t1 * t1 + 1;
  const Index p2 = t2 * t2 + 1;
  if (n1 % p1 != 0 || n2 % p2 != 0) {
    const auto nearest = [](Index n, Index p) {
      const Index down = std::max(p, (n / p) * p);
      const Index up = down + p;
      return (n - down <= up - n) ? down : up;
    };
    throw DomainError("mesh grid with t1=" + std::to_string(t1) + ", t2=" + std::to_string(t2) +
                      " needs n1 divisible by " + std::to_string(p1) + " and n2 divisible by " +
                      std::to_string(p2) + "; nearest valid sizes are n1=" + std::to_string(nearest(n1, p1)) +
                      ", n2=" + std::to_string(nearest(n2, p2)));
  }
  MeshGrid g;
  g.t1 = t1;
  g.t2 = t2;
  g.n1 = n1;
  g.n2 = n2;
  const Index h1 = n1 / p1;
  const Index h2 = n2 / p2;
  for (Index i = 1; i <= t1 * t1; ++i) g.m1.push_back(1 + i * h1);
  for (Index i = 0; i < t1; ++i) g.n1_set.push_back(1 + ((t1 + 1) / 2 + t1 * i) * h1);
  for (Index i = 1; i <= t2 * t2; ++i) g.m2.push_back(1 + i * h2);
  for (Index i = 0; i < t2; ++i) g.n2_set.push_back(1 + ((t2 + 1) / 2 + t2 * i) * h2);

  std::set<AtomIndex> mesh;
  for (Index a : g.m1)
    for (Index b : g.n2_set) mesh.insert({a, b});
  for (Index a : g.n1_set)
    for (Index b : g.m2) mesh.insert({a, b});
  g.s_m.jumps.assign(mesh.begin(), mesh.end());
  for (Index a : g.n1_set)
    for (Index b : g.n2_set) g.s_n.jumps.push_back({a, b});
  g.size_before = g.s_m.size();

  // One extra point per node: (a+1, b+1), or the next free point after it in
  // row-major order.
  std::set<AtomIndex> taken = mesh;
  for (const AtomIndex& node : g.s_n.jumps) {
    Index j = node.j + 1;
    Index k = node.k + 1;
    while (true) {
      if (k > n2) {
        k = 2;
        ++j;
      }
      if (j > n1) j = 2;
      if (!taken.count({j, k})) break;
      ++k;
    }
    taken.insert({j, k});
  }
  g.augmented.jumps.assign(taken.begin(), taken.end());
  g.size_after = g.augmented.size();
  return g;
}

double mesh_antiprojection_bound(Index t1, Index t2) {
  const double a = static_cast<double>(t1 * t1);
  const double b = static_cast<double>(t2 * t2);
  return 1.0 / a + 1.0 / b + static_cast<double>(((t1 + 1) / 2) * ((t2 + 1) / 2)) / (a * b);
}

SlowRateConfig slow_rate_config(double sigma, double n, std::optional<double> tv_f0) {
  if (!(n >= 2.0)) throw DomainError("slow-rate configuration needs n >= 2");
  if (!(sigma > 0.0)) throw DomainError("slow-rate configuration needs sigma > 0");
  if (tv_f0 && !(*tv_f0 > 0.0)) throw DomainError("TV(f0) must be positive");
  const double logterm = std::pow(std::log(2.0 * n), 3.0 / 8.0);
  const double ratio = tv_f0 ? *tv_f0 / sigma : 1.0;
  SlowRateConfig c;
  const double raw = std::pow(2.0, 1.25) * std::pow(3.0, 0.75) * logterm * std::pow(ratio, 0.75);
  // Guard against the ceiling of an integer-valued product drifting upward.
  c.s_raw = static_cast<Index>(std::ceil(raw - 1e-12));
  c.t = 2;
  while (2 * c.t * c.t * c.t < c.s_raw) c.t += 2;
  c.s_m = 2 * c.t * c.t * c.t;
  c.lambda = std::pow(3.0, 0.75) * sigma * logterm /
             (std::pow(2.0, 1.0 / 12.0) * std::pow(n, 5.0 / 8.0) * std::pow(ratio, 0.25));
  c.gamma_tilde = 3.0 / (2.0 * static_cast<double>(c.t));
  c.lambda_floor = c.gamma_tilde * universal_lambda(sigma, n, std::log(2.0 * n));
  c.admissible = c.lambda >= c.lambda_floor;
  return c;
}

double off_support_tv(const Image& g, const ActiveSet& s) {
  DerivativeField d = total_derivative(g);
  for (const AtomIndex& t : s.jumps) d.at(t.j, t.k) = 0.0;
  return d.l1();
}

double oracle_rhs_fast(const Image& g, const ActiveSet& s, const Tessellation& tess, double sigma, double lambda,
                       double x, const Image& f0_tilde) {
  const double n = static_cast<double>(g.size());
  const double sn = static_cast<double>(s.size());
  const double term = sigma * std::sqrt(sn / n) + sigma * std::sqrt(2.0 * x / n) +
                      lambda * std::sqrt(gamma_bound_formula(tess));
  return squared_norm(g - f0_tilde) / n + 4.0 * lambda * off_support_tv(g, s) + term * term;
}

double oracle_rhs_slow(const Image& g, double sigma, double lambda, double s, double x, const Image& f0_tilde) {
  const double n = static_cast<double>(g.size());
  const double term = sigma * std::sqrt(2.0 * x / n) + sigma * std::sqrt(s / n);
  return squared_norm(g - f0_tilde) / n + 4.0 * lambda * tv(g) + term * term;
}

double oracle_rhs_thm4(const Image& g, const ActiveSet& s, double sigma, double lambda, double x,
                       const Image& f0_tilde) {
  const double n = static_cast<double>(g.size());
  const double sn = static_cast<double>(s.size());
  const double term = sigma * std::sqrt(sn / n) + sigma * std::sqrt(2.0 * x / n) +
                      lambda * std::sqrt(thm4_gamma_squared(sn, n));
  return squared_norm(g - f0_tilde) / n + 4.0 * lambda * off_support_tv(g, s) + term * term;
}

double bound_probability(double x, double t) { return 1.0 - std::exp(-x) - std::exp(-t); }

double fast_lambda(const Tessellation& tess, double sigma, double t) {
  const double n = static_cast<double>(tess.n1 * tess.n2);
  return 2.0 *
         std::sqrt(static_cast<double>(tess.d1_max()) / static_cast<double>(tess.n1) +
                   static_cast<double>(tess.d2_max()) / static_cast<double>(tess.n2)) *
         universal_lambda(sigma, n, t);
}

BoundReport bound_report(const Image& f0_tilde, const ActiveSet& s, double sigma, double lambda, double x,
                         double t) {
  const double n = static_cast<double>(f0_tilde.size());
  if (!(x > 0.0)) x = std::log(2.0 * n);
  if (!(t > 0.0)) t = std::log(2.0 * n);
  const Tessellation tess = build_tessellation(s, f0_tilde.rows(), f0_tilde.cols());
  BoundReport r;
  r.gamma_tilde = noise_weights(tess).gamma_tilde;
  r.lambda_universal = universal_lambda(sigma, n, t);
  r.lambda_fast = fast_lambda(tess, sigma, t);
  r.gamma_squared_bound = gamma_bound_formula(tess);
  r.oracle_rhs = oracle_rhs_fast(f0_tilde, s, tess, sigma, lambda, x, f0_tilde);
  r.probability = bound_probability(x, t);
  return r;
}

}  // namespace tvd
