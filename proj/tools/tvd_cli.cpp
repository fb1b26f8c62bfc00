// tvd: denoise images, run the rate simulation, run verification suites and
// print bound reports. Exit status 0 on success, 1 on numerical failure, 2 on
// usage or configuration errors.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tvd/core.hpp"
#include "tvd/experiments.hpp"
#include "tvd/io.hpp"
#include "tvd/solvers.hpp"
#include "tvd/theory.hpp"
#include "tvd/verification.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace tvd;

namespace {

constexpr int kOk = 0;
constexpr int kNumerical = 1;
constexpr int kUsage = 2;
constexpr int kSidecarSchemaVersion = 1;

struct Tuning {
  std::optional<double> lambda, lambda1, lambda2;
  std::string rule = "universal";
  double multiplier = 1.0;
  double sigma = 1.0;
  double sparsity = 4.0;
  std::string scaling = "plain";
};

struct Solver {
  double tol = 1e-6;
  long max_sweeps = 0;
};

void add_tuning_flags(CLI::App* cmd, Tuning& t) {
  auto* lam = cmd->add_option("--lambda", t.lambda, "interaction tuning parameter");
  auto* rule = cmd->add_option("--lambda-rule", t.rule, "schedule for lambda when --lambda is absent")
                   ->check(CLI::IsMember({"universal", "thm4", "fast", "slow", "paper-sim"}));
  lam->excludes(rule);
  cmd->add_option("--lambda1", t.lambda1, "row main-effect tuning parameter");
  cmd->add_option("--lambda2", t.lambda2, "column main-effect tuning parameter");
  cmd->add_option("--lambda-multiplier", t.multiplier, "factor applied to the scheduled lambda")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--sigma", t.sigma, "noise level on the [0, 1] pixel scale")->check(CLI::NonNegativeNumber);
  cmd->add_option("--sparsity", t.sparsity, "assumed number of jumps for thm4 and fast")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--penalty-scaling", t.scaling)->check(CLI::IsMember({"plain", "standardized"}));
}

// Regular sqrt(s) x sqrt(s) grid of jumps, the layout the thm4 schedule has in mind.
ActiveSet regular_grid(Index n1, Index n2, double s) {
  const Index m = std::max<Index>(1, static_cast<Index>(std::lround(std::sqrt(s))));
  ActiveSet a;
  for (Index p = 1; p <= m; ++p)
    for (Index q = 1; q <= m; ++q)
      a.jumps.push_back({std::clamp<Index>(1 + (p * n1) / (m + 1), 3, n1 - 1),
                         std::clamp<Index>(1 + (q * n2) / (m + 1), 3, n2 - 1)});
  return a;
}

double scheduled_lambda(const Tuning& t, Index n1, Index n2, json& info) {
  const double n = static_cast<double>(n1 * n2);
  const double log2n = std::log(2.0 * n);
  double lam = 0.0;
  if (t.rule == "universal") {
    lam = universal_lambda(t.sigma, n, log2n);
  } else if (t.rule == "thm4") {
    lam = thm4_lambda(t.sparsity, t.sigma, n);
  } else if (t.rule == "paper-sim") {
    lam = paper_sim_lambda(t.sigma, n);
  } else if (t.rule == "fast") {
    const Tessellation tess = build_tessellation(regular_grid(n1, n2, t.sparsity), n1, n2);
    lam = fast_lambda(tess, t.sigma, log2n);
  } else {
    const SlowRateConfig sc = slow_rate_config(t.sigma, n);
    lam = sc.lambda;
    info["slow"] = {{"t", sc.t}, {"s_m", sc.s_m}, {"lambda_floor", sc.lambda_floor}, {"admissible", sc.admissible}};
  }
  return lam * t.multiplier;
}

TuningConfig resolve_tuning(const Tuning& t, Index n1, Index n2, json& info) {
  TuningConfig cfg;
  cfg.sigma = t.sigma;
  cfg.lambda = t.lambda ? *t.lambda : scheduled_lambda(t, n1, n2, info);
  cfg.lambda1 = t.lambda1 ? *t.lambda1 : default_main_effect_lambda(t.sigma, n1, n2);
  cfg.lambda2 = t.lambda2 ? *t.lambda2 : default_main_effect_lambda(t.sigma, n2, n1);
  info["lambda_rule"] = t.lambda ? "explicit" : t.rule;
  return cfg;
}

PenaltyScaling parse_scaling(const std::string& s) {
  return s == "standardized" ? PenaltyScaling::kStandardized : PenaltyScaling::kPlain;
}

bool is_csv(const std::string& path) { return fs::path(path).extension() == ".csv"; }

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

// ---- denoise -------------------------------------------------------------------

struct DenoiseArgs {
  std::string input, output, sidecar, format = "auto";
  Tuning tuning;
  Solver solver;
};

int run_denoise(const DenoiseArgs& a) {
  Image y;
  int maxval = 255;
  if (is_csv(a.input)) {
    y = read_csv_file(a.input);
  } else {
    GrayImage g = read_pgm_file(a.input);
    y = std::move(g.pixels);
    maxval = g.maxval;
  }
  std::string format = a.format;
  if (format == "auto") format = is_csv(a.output) ? "csv" : "pgm";

  json info;
  const TuningConfig cfg = resolve_tuning(a.tuning, y.rows(), y.cols(), info);
  DenoiseOptions opt;
  opt.interaction.tol = a.solver.tol;
  opt.interaction.max_sweeps = a.solver.max_sweeps;
  opt.interaction.scaling = parse_scaling(a.tuning.scaling);
  const DenoiseResult r = denoise(y, cfg, opt);
  const Image f = r.image();

  const double n = static_cast<double>(y.size());
  json side = {{"schema_version", kSidecarSchemaVersion},
               {"input", a.input},
               {"output", a.output},
               {"n1", y.rows()},
               {"n2", y.cols()},
               {"lambda", cfg.lambda},
               {"lambda1", cfg.lambda1},
               {"lambda2", cfg.lambda2},
               {"sigma", cfg.sigma},
               {"penalty_scaling", a.tuning.scaling},
               {"converged", r.converged},
               {"iterations", r.iterations},
               {"objective", r.objective},
               {"kktResidual", r.kkt_residual},
               {"tv", tv(f)},
               {"tv1", tv1(f)},
               {"tv2", tv2(f)}};
  side.update(info);
  side["anova_norms"] = {{"mean", r.estimate.mean_image().matrix().norm()},
                         {"rows", r.estimate.row_image().matrix().norm()},
                         {"cols", r.estimate.col_image().matrix().norm()},
                         {"interactions", r.estimate.interactions.matrix().norm()}};
  // Comparing the objective at f-hat and at Y gives
  // ||Y - f-hat||^2/n <= 2 lambda TV(Y) + 2 lambda1 TV1(Y) + 2 lambda2 TV2(Y).
  const double fit = (y.matrix() - f.matrix()).squaredNorm() / n;
  const double bound = 2.0 * (cfg.lambda * tv(y) + cfg.lambda1 * tv1(y) + cfg.lambda2 * tv2(y));
  side["shrinkage"] = {{"mse_to_input", fit}, {"bound", bound}, {"holds", fit <= bound + 1e-12}};

  const std::string sidecar = a.sidecar.empty() ? a.output + ".json" : a.sidecar;
  if (!r.converged) {
    side["partial"] = true;
    write_json(sidecar, side);
    std::cerr << "tvd: solver did not reach KKT residual " << a.solver.tol << " (got " << r.kkt_residual
              << " after " << r.iterations << " sweeps)\n";
    return kNumerical;
  }
  if (format == "csv") {
    write_csv_file(a.output, f);
  } else {
    write_pgm_file(a.output, f, maxval, format != "pgm-plain");
  }
  write_json(sidecar, side);
  std::cout << "lambda " << cfg.lambda << "  objective " << r.objective << "  kkt " << r.kkt_residual << '\n';
  return kOk;
}

// ---- simulate --------------------------------------------------------------------

struct SimulateArgs {
  std::string config, outdir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

int run_simulate(const SimulateArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw FormatError("cannot open '" + a.config + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(a.config + ": " + e.what());
  }
  SimConfig cfg = sim_config_from_json(j);
  if (a.seed) cfg.seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  cfg.validate();

  fs::create_directories(a.outdir);
  const SimResult r = run_rate_simulation(cfg);
  {
    std::ofstream csv(fs::path(a.outdir) / "simulation.csv");
    if (!csv) throw FormatError("cannot write into '" + a.outdir + "'");
    write_simulation_csv(csv, r);
  }
  write_json((fs::path(a.outdir) / "summary.json").string(), simulation_summary(cfg, r));

  int failed = 0;
  for (const SimRow& row : r.rows) failed += !row.error.empty() || !row.converged;
  if (r.window_sizes.size() >= 2) {
    std::cout << "slope " << r.slope << " over n1 in [" << r.window_sizes.front() << ", " << r.window_sizes.back()
              << "]\n";
  } else {
    std::cout << "slope n/a (fewer than two sizes)\n";
  }
  if (failed > 0) {
    std::cerr << "tvd: " << failed << " of " << r.rows.size() << " runs failed or did not converge\n";
    return kNumerical;
  }
  return kOk;
}

// ---- verify ------------------------------------------------------------------------

int run_verify(const std::string& suite, std::uint64_t seed, const std::string& format) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end()) {
    std::cerr << "tvd: unknown suite '" << suite << "'; expected one of";
    for (const auto& s : names) std::cerr << ' ' << s;
    std::cerr << '\n';
    return kUsage;
  }
  const SuiteReport r = run_suite(suite, seed);
  if (format == "json") {
    std::cout << r.to_json().dump(2) << '\n';
  } else {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << "  checks " << r.checks << "  violations "
              << r.violations << "  worst " << r.worst << '\n';
  }
  if (!r.passed) {
    std::cerr << "tvd: first failure: " << r.first_failure << '\n';
    return kNumerical;
  }
  return kOk;
}

// ---- bounds ------------------------------------------------------------------------

struct BoundsArgs {
  std::string input;
  Index n1 = 32, n2 = 32;
  Tuning tuning;
};

int run_bounds(const BoundsArgs& a) {
  Image f0 = a.input.empty() ? generate_truth(a.n1, a.n2)
                             : (is_csv(a.input) ? read_csv_file(a.input) : read_pgm_file(a.input).pixels);
  const Image g = interaction_part(f0);
  const ActiveSet s = active_set_of(g, 1e-9);
  const Index n1 = g.rows(), n2 = g.cols();
  const double n = static_cast<double>(n1 * n2);
  json info;
  const TuningConfig cfg = resolve_tuning(a.tuning, n1, n2, info);
  const BoundReport b = bound_report(g, s, a.tuning.sigma, cfg.lambda);
  const SlowRateConfig slow = slow_rate_config(a.tuning.sigma, n);

  json out = {{"n1", n1},
              {"n2", n2},
              {"sigma", a.tuning.sigma},
              {"active_set_size", s.size()},
              {"lambda", cfg.lambda},
              {"gamma_tilde", b.gamma_tilde},
              {"lambda_universal", b.lambda_universal},
              {"lambda_fast", b.lambda_fast},
              {"gamma_squared_bound", b.gamma_squared_bound},
              {"oracle_rhs", b.oracle_rhs},
              {"probability", b.probability},
              {"schedules",
               {{"universal", universal_lambda(a.tuning.sigma, n, std::log(2.0 * n))},
                {"thm4", thm4_lambda(static_cast<double>(std::max<Index>(s.size(), 1)), a.tuning.sigma, n)},
                {"paper-sim", paper_sim_lambda(a.tuning.sigma, n)},
                {"slow", slow.lambda},
                {"slow_floor", slow.lambda_floor}}}};
  out.update(info);
  std::cout << out.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-dimensional total variation denoising"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string format = "auto";

  DenoiseArgs dn;
  auto* denoise_cmd = app.add_subcommand("denoise", "denoise a PGM or CSV image");
  denoise_cmd->add_option("input", dn.input, "input image (.pgm or .csv)")->required()->check(CLI::ExistingFile);
  denoise_cmd->add_option("output", dn.output, "output image")->required();
  denoise_cmd->add_option("--sidecar", dn.sidecar, "JSON report path (default: output + .json)");
  denoise_cmd->add_option("--format", dn.format, "output format")
      ->check(CLI::IsMember({"auto", "pgm", "pgm-plain", "csv"}));
  denoise_cmd->add_option("--tol", dn.solver.tol, "KKT residual target")->check(CLI::PositiveNumber);
  denoise_cmd->add_option("--max-sweeps", dn.solver.max_sweeps, "coordinate descent sweep cap (0: automatic)")
      ->check(CLI::NonNegativeNumber);
  add_tuning_flags(denoise_cmd, dn.tuning);

  SimulateArgs sim;
  auto* simulate_cmd = app.add_subcommand("simulate", "run the rate simulation from a JSON config");
  simulate_cmd->add_option("config", sim.config, "JSON configuration")->required()->check(CLI::ExistingFile);
  simulate_cmd->add_option("outdir", sim.outdir, "directory for simulation.csv and summary.json")->required();
  simulate_cmd->add_option("--seed", sim.seed, "override the configured seed");
  simulate_cmd->add_option("--threads", sim.threads, "worker threads (0: hardware)");

  std::string suite;
  auto* verify_cmd = app.add_subcommand("verify", "run a verification suite");
  verify_cmd->add_option("suite", suite, "suite name")->required();
  verify_cmd->add_option("--seed", seed, "random seed");
  verify_cmd->add_option("--format", format, "report format")->check(CLI::IsMember({"auto", "text", "json"}));

  BoundsArgs bd;
  auto* bounds_cmd = app.add_subcommand("bounds", "print tuning schedules and oracle bounds");
  bounds_cmd->add_option("--input", bd.input, "image whose interaction part is the oracle")
      ->check(CLI::ExistingFile);
  bounds_cmd->add_option("--n1", bd.n1, "rows of the synthetic truth");
  bounds_cmd->add_option("--n2", bd.n2, "columns of the synthetic truth");
  add_tuning_flags(bounds_cmd, bd.tuning);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*denoise_cmd) return run_denoise(dn);
    if (*simulate_cmd) return run_simulate(sim);
    if (*verify_cmd) return run_verify(suite, seed, format);
    return run_bounds(bd);
  } catch (const FormatError& e) {
    std::cerr << "tvd: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "tvd: " << e.what() << '\n';
    return kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "tvd: " << e.what() << '\n';
    return kUsage;
  } catch (const TessellationError& e) {
    std::cerr << "tvd: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "tvd: " << e.what() << '\n';
    return kNumerical;
  }
}
