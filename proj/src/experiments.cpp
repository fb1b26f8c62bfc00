#include "tvd/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>
#include <tuple>

#include "tvd/core.hpp"
#include "tvd/rng.hpp"
#include "tvd/theory.hpp"

namespace tvd {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

// Doubly centered noise for one (size, rep) pair.
Image noise_interactions(std::uint64_t seed, Index n1, Index n2, int rep, double sigma) {
  Philox rng(seed, static_cast<std::uint64_t>(n1 * 100003 + n2), static_cast<std::uint64_t>(rep));
  Matrix e(n1, n2);
  for (Index i = 0; i < e.size(); ++i) e.data()[i] = sigma * rng.normal();
  return Image(double_center(e));
}

double mse(const Image& a, const Image& b) { return squared_norm(a - b) / static_cast<double>(a.size()); }

template <typename T>
T require(const json& j, const char* field) {
  if (!j.contains(field)) throw FormatError(std::string("missing required field '") + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("field '") + field + "' has the wrong type");
  }
}

template <typename T>
T optional_field(const json& j, const char* field, T fallback) {
  if (!j.contains(field)) return fallback;
  try {
    return j.at(field).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("field '") + field + "' has the wrong type");
  }
}

}  // namespace

Image generate_truth(Index n1, Index n2) {
  if (n1 < 4 || n2 < 4 || n1 % 4 != 0 || n2 % 4 != 0) {
    throw DomainError("truth image needs sizes that are positive multiples of 4, got " + std::to_string(n1) +
                      "x" + std::to_string(n2));
  }
  Image f(n1, n2);
  f.matrix().block(n1 / 4, n2 / 4, n1 / 2, n2 / 2).setOnes();
  return f;
}

std::string to_string(LambdaRule rule) {
  switch (rule) {
    case LambdaRule::kPaperSim: return "paper-sim";
    case LambdaRule::kThm4: return "thm4";
    case LambdaRule::kUniversal: return "universal";
    case LambdaRule::kCustom: return "custom";
  }
  return "unknown";
}

LambdaRule lambda_rule_from_string(const std::string& name) {
  if (name == "paper-sim" || name == "paperSim") return LambdaRule::kPaperSim;
  if (name == "thm4") return LambdaRule::kThm4;
  if (name == "universal") return LambdaRule::kUniversal;
  if (name == "custom") return LambdaRule::kCustom;
  throw DomainError("unknown lambda rule '" + name + "'");
}

void SimConfig::validate() const {
  if (sizes.empty()) throw DomainError("simulation needs at least one size");
  for (Index n : sizes) {
    if (n < 8 || n % 4 != 0) throw DomainError("simulation sizes must be multiples of 4 and at least 8, got " +
                                               std::to_string(n));
  }
  if (reps < 1) throw DomainError("reps must be at least 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be finite and nonnegative");
  if (!(lambda_multiplier > 0.0) || !std::isfinite(lambda_multiplier)) {
    throw DomainError("lambda multiplier must be positive");
  }
  if (rule == LambdaRule::kCustom && (!(lambda_value >= 0.0) || !std::isfinite(lambda_value))) {
    throw DomainError("custom lambda must be finite and nonnegative");
  }
  if (window < 2) throw DomainError("slope window must cover at least 2 sizes");
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
}

double simulation_lambda(const SimConfig& cfg, Index n1) {
  const double n = static_cast<double>(n1 * n1);
  double base = 0.0;
  switch (cfg.rule) {
    case LambdaRule::kPaperSim: base = paper_sim_lambda(cfg.sigma, n); break;
    case LambdaRule::kThm4: base = thm4_lambda(4.0, cfg.sigma, n); break;
    case LambdaRule::kUniversal: base = universal_lambda(cfg.sigma, n, std::log(2.0 * n)); break;
    case LambdaRule::kCustom: base = cfg.lambda_value; break;
  }
  return cfg.lambda_multiplier * base;
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("line fit needs two or more points");
  const double m = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double slope = sxy / sxx;
  return {slope, my - slope * mx};
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < order.size();) {
      std::size_t k = i;
      while (k + 1 < order.size() && v[order[k + 1]] == v[order[i]]) ++k;
      for (std::size_t m = i; m <= k; ++m) r[order[m]] = 0.5 * static_cast<double>(i + k);
      i = k + 1;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  const double m = static_cast<double>(x.size());
  const double mean = (m - 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mean) * (ry[i] - mean);
    sxx += (rx[i] - mean) * (rx[i] - mean);
    syy += (ry[i] - mean) * (ry[i] - mean);
  }
  return sxy / std::sqrt(sxx * syy);
}

SimResult run_rate_simulation(const SimConfig& cfg) {
  cfg.validate();
  std::vector<Index> sizes = cfg.sizes;
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());

  SimResult result;
  result.rows.resize(sizes.size() * static_cast<std::size_t>(cfg.reps));
  parallel_for(result.rows.size(), cfg.threads, [&](std::size_t job) {
    const Index n1 = sizes[job / cfg.reps];
    const int rep = static_cast<int>(job % cfg.reps);
    SimRow& row = result.rows[job];
    row.n1 = n1;
    row.rep = rep;
    row.lambda = simulation_lambda(cfg, n1);
    const Image f0 = interaction_part(generate_truth(n1, n1));
    const double n = static_cast<double>(n1 * n1);
    row.bound = oracle_rhs_thm4(f0, active_set_of(f0, 1e-9), cfg.sigma, row.lambda, std::log(2.0 * n), f0);
    try {
      const Image y = f0 + noise_interactions(cfg.seed, n1, n1, rep, cfg.sigma);
      InteractionLassoOptions opts;
      opts.tol = cfg.tol;
      opts.scaling = cfg.scaling;
      const InteractionLassoResult fit = interaction_lasso(y, row.lambda, opts);
      row.mse = mse(fit.estimate, f0);
      row.converged = fit.converged;
      row.kkt_residual = fit.kkt_residual;
      row.violated = row.mse > row.bound;
    } catch (const std::exception& e) {
      row.mse = kNaN;
      row.error = e.what();
    }
  });

  for (std::size_t s = 0; s < sizes.size(); ++s) {
    SizeStats st;
    st.n1 = sizes[s];
    st.lambda = simulation_lambda(cfg, sizes[s]);
    std::vector<double> values;
    int violations = 0;
    for (int r = 0; r < cfg.reps; ++r) {
      const SimRow& row = result.rows[s * cfg.reps + r];
      if (!row.error.empty()) {
        ++st.failures;
        continue;
      }
      values.push_back(row.mse);
      violations += row.violated ? 1 : 0;
    }
    if (!values.empty()) {
      const double m = static_cast<double>(values.size());
      st.mean_mse = std::accumulate(values.begin(), values.end(), 0.0) / m;
      double ss = 0.0;
      for (double v : values) ss += (v - st.mean_mse) * (v - st.mean_mse);
      st.sd_mse = values.size() > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
      st.violation_rate = violations / m;
    } else {
      st.mean_mse = kNaN;
      st.sd_mse = kNaN;
    }
    result.per_size.push_back(st);
  }

  const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(cfg.window), sizes.size());
  std::vector<double> lx, ly, sz, mm;
  for (std::size_t s = sizes.size() - w; s < sizes.size(); ++s) {
    const SizeStats& st = result.per_size[s];
    result.window_sizes.push_back(st.n1);
    lx.push_back(std::log(static_cast<double>(st.n1 * st.n1)));
    ly.push_back(std::log(st.mean_mse));
    sz.push_back(static_cast<double>(st.n1));
    mm.push_back(st.mean_mse);
  }
  if (w >= 2) {
    std::tie(result.slope, result.intercept) = fit_line(lx, ly);
    result.rank_correlation = spearman(sz, mm);
  } else {
    result.slope = kNaN;
    result.intercept = kNaN;
    result.rank_correlation = kNaN;
  }
  return result;
}

void write_simulation_csv(std::ostream& out, const SimResult& result) {
  out << "n1,n,rep,lambda,mse,bound,violated,converged,kkt_residual\n";
  out.precision(17);
  for (const SimRow& r : result.rows) {
    out << r.n1 << ',' << r.n1 * r.n1 << ',' << r.rep << ',' << r.lambda << ',' << r.mse << ',' << r.bound << ','
        << (r.violated ? 1 : 0) << ',' << (r.converged ? 1 : 0) << ',' << r.kkt_residual << '\n';
  }
}

json sim_config_to_json(const SimConfig& cfg) {
  return json{{"sizes", cfg.sizes},
              {"reps", cfg.reps},
              {"sigma", cfg.sigma},
              {"lambda_rule", to_string(cfg.rule)},
              {"lambda_value", cfg.lambda_value},
              {"lambda_multiplier", cfg.lambda_multiplier},
              {"penalty_scaling", cfg.scaling == PenaltyScaling::kPlain ? "plain" : "standardized"},
              {"seed", cfg.seed},
              {"window", cfg.window},
              {"tol", cfg.tol},
              {"threads", cfg.threads}};
}

SimConfig sim_config_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("simulation config must be a JSON object");
  SimConfig cfg;
  cfg.sizes = require<std::vector<Index>>(j, "sizes");
  cfg.reps = require<int>(j, "reps");
  cfg.sigma = require<double>(j, "sigma");
  try {
    cfg.rule = lambda_rule_from_string(require<std::string>(j, "lambda_rule"));
  } catch (const DomainError& e) {
    throw FormatError(std::string("field 'lambda_rule': ") + e.what());
  }
  cfg.seed = require<std::uint64_t>(j, "seed");
  if (cfg.rule == LambdaRule::kCustom) cfg.lambda_value = require<double>(j, "lambda_value");
  cfg.lambda_multiplier = optional_field<double>(j, "lambda_multiplier", cfg.lambda_multiplier);
  const std::string scaling = optional_field<std::string>(j, "penalty_scaling", "plain");
  if (scaling == "plain") {
    cfg.scaling = PenaltyScaling::kPlain;
  } else if (scaling == "standardized") {
    cfg.scaling = PenaltyScaling::kStandardized;
  } else {
    throw FormatError("field 'penalty_scaling' must be 'plain' or 'standardized'");
  }
  cfg.window = optional_field<int>(j, "window", cfg.window);
  cfg.tol = optional_field<double>(j, "tol", cfg.tol);
  cfg.threads = optional_field<int>(j, "threads", cfg.threads);
  try {
    cfg.validate();
  } catch (const DomainError& e) {
    throw FormatError(e.what());
  }
  return cfg;
}

json simulation_summary(const SimConfig& cfg, const SimResult& result) {
  const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json per_size = json::array();
  for (const SizeStats& s : result.per_size) {
    per_size.push_back({{"n1", s.n1},
                        {"n", s.n1 * s.n1},
                        {"lambda", s.lambda},
                        {"mean_mse", num(s.mean_mse)},
                        {"sd_mse", num(s.sd_mse)},
                        {"violation_rate", s.violation_rate},
                        {"failures", s.failures}});
  }
  return json{{"schema_version", kSimSchemaVersion},
              {"config", sim_config_to_json(cfg)},
              {"per_size", per_size},
              {"slope", num(result.slope)},
              {"intercept", num(result.intercept)},
              {"slope_window", result.window_sizes},
              {"rank_correlation", num(result.rank_correlation)}};
}

std::string to_string(OracleTheorem theorem) {
  switch (theorem) {
    case OracleTheorem::kThm4: return "thm4";
    case OracleTheorem::kFastMain: return "fast-main";
    case OracleTheorem::kSlowMesh: return "slow-mesh";
  }
  return "unknown";
}

OracleMcResult verify_oracle_bound(const OracleMcConfig& cfg) {
  if (cfg.reps < 1) throw DomainError("Monte Carlo needs at least one rep");
  if (!(cfg.sigma >= 0.0)) throw DomainError("sigma must be nonnegative");
  const Index n1 = cfg.n1;
  const Image f0 = interaction_part(generate_truth(n1, n1));
  const double n = static_cast<double>(n1 * n1);
  const double x = std::log(2.0 * n);
  const ActiveSet s = active_set_of(f0, 1e-9);

  OracleMcResult out;
  out.theorem = cfg.theorem;
  out.n1 = n1;
  out.reps = cfg.reps;
  out.probability = bound_probability(x, x);
  switch (cfg.theorem) {
    case OracleTheorem::kThm4: {
      if (s.size() != 4) throw DomainError("thm4 needs the 4-jump truth on a size of at least 8");
      out.lambda_displayed = thm4_lambda(4.0, cfg.sigma, n);
      out.lambda = cfg.lambda_multiplier * out.lambda_displayed;
      out.rhs = oracle_rhs_thm4(f0, s, cfg.sigma, out.lambda, x, f0);
      break;
    }
    case OracleTheorem::kFastMain: {
      const Tessellation tess = build_tessellation(s, n1, n1);
      out.lambda_displayed = fast_lambda(tess, cfg.sigma, x);
      out.lambda = cfg.lambda_multiplier * out.lambda_displayed;
      out.rhs = oracle_rhs_fast(f0, s, tess, cfg.sigma, out.lambda, x, f0);
      break;
    }
    case OracleTheorem::kSlowMesh: {
      if (!(cfg.sigma > 0.0)) throw DomainError("the data-driven slow-rate branch needs sigma > 0");
      const SlowRateConfig sc = slow_rate_config(cfg.sigma, n);
      build_mesh_grid(sc.t, sc.t, n1, n1);  // admissibility of the size
      out.lambda_displayed = sc.lambda;
      out.lambda = cfg.lambda_multiplier * std::max(sc.lambda, sc.lambda_floor);
      out.rhs = oracle_rhs_slow(f0, cfg.sigma, out.lambda, static_cast<double>(sc.s_m), x, f0);
      break;
    }
  }

  std::vector<double> mses(static_cast<std::size_t>(cfg.reps), kNaN);
  parallel_for(mses.size(), cfg.threads, [&](std::size_t rep) {
    try {
      const Image y = f0 + noise_interactions(cfg.seed, n1, n1, static_cast<int>(rep), cfg.sigma);
      mses[rep] = mse(interaction_lasso(y, out.lambda).estimate, f0);
    } catch (const std::exception&) {
      mses[rep] = kNaN;
    }
  });
  double sum = 0.0;
  int ok = 0;
  for (double m : mses) {
    if (!std::isfinite(m)) {
      ++out.failures;
      continue;
    }
    ++ok;
    sum += m;
    out.max_mse = std::max(out.max_mse, m);
    if (m > out.rhs) ++out.violations;
  }
  // A failed solve cannot certify the bound: count it against the gate.
  out.violations += out.failures;
  out.mean_mse = ok > 0 ? sum / ok : kNaN;
  return out;
}

}  // namespace tvd
