#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "tvd/core.hpp"
#include "tvd/experiments.hpp"
#include "tvd/theory.hpp"

using namespace tvd;

TEST_CASE("truth image") {
  const Image t4 = generate_truth(4, 4);
  for (Index j = 1; j <= 4; ++j)
    for (Index k = 1; k <= 4; ++k) CHECK(t4(j, k) == ((j >= 2 && j <= 3 && k >= 2 && k <= 3) ? 1.0 : 0.0));
  CHECK(tv(generate_truth(8, 8)) == 4.0);
  for (Index n : {4, 8, 12, 40, 100}) {
    CHECK(generate_truth(n, n).matrix().mean() == doctest::Approx(0.25));
    CHECK(generate_truth(n, n).matrix() == oracle::truth(n, n));
  }
  CHECK(generate_truth(12, 20).matrix() == oracle::truth(12, 20));
  CHECK_THROWS_AS(generate_truth(10, 8), DomainError);
  CHECK_THROWS_AS(generate_truth(0, 8), DomainError);
}

TEST_CASE("lambda rules") {
  SimConfig cfg;
  const double n = 32.0 * 32.0;
  cfg.rule = LambdaRule::kPaperSim;
  CHECK(simulation_lambda(cfg, 32) == doctest::Approx(std::sqrt(std::log(2 * n) / (2 * n))));
  cfg.rule = LambdaRule::kThm4;
  CHECK(simulation_lambda(cfg, 32) == doctest::Approx(4 * std::sqrt(std::log(2 * n) / (2 * n))));
  cfg.rule = LambdaRule::kUniversal;
  CHECK(simulation_lambda(cfg, 32) == doctest::Approx(std::sqrt(4 * std::log(2 * n) / n)));
  cfg.rule = LambdaRule::kCustom;
  cfg.lambda_value = 0.3;
  cfg.lambda_multiplier = 0.5;
  CHECK(simulation_lambda(cfg, 32) == doctest::Approx(0.15));
  CHECK(lambda_rule_from_string(to_string(LambdaRule::kThm4)) == LambdaRule::kThm4);
  CHECK_THROWS_AS(lambda_rule_from_string("fastest"), DomainError);
}

TEST_CASE("fit helpers") {
  const auto [slope, intercept] = fit_line({1, 2, 3, 4}, {3, 1, -1, -3});
  CHECK(slope == doctest::Approx(-2.0));
  CHECK(intercept == doctest::Approx(5.0));
  CHECK(spearman({1, 2, 3, 4}, {10, 20, 25, 100}) == doctest::Approx(1.0));
  CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(spearman({1, 2, 3}, {1, 1, 2}) == doctest::Approx(std::sqrt(3.0) / 2.0));
  CHECK_THROWS_AS(fit_line({1}, {1}), DomainError);
}

TEST_CASE("config validation") {
  SimConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.sizes = {16, 18};
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg.sizes = {4};
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = SimConfig{};
  cfg.reps = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = SimConfig{};
  cfg.lambda_multiplier = 0.0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("noiseless runs stay within the shrinkage bound") {
  SimConfig cfg;
  cfg.sizes = {8, 16, 24};
  cfg.reps = 2;
  cfg.sigma = 0.0;
  cfg.rule = LambdaRule::kCustom;
  cfg.lambda_value = 0.01;
  cfg.scaling = PenaltyScaling::kPlain;
  cfg.window = 2;
  const SimResult r = run_rate_simulation(cfg);
  for (const SimRow& row : r.rows) {
    const Image f0 = interaction_part(generate_truth(row.n1, row.n1));
    CHECK(row.error.empty());
    CHECK(row.converged);
    CHECK(row.mse <= 4.0 * row.lambda * tv(f0) + 1e-12);
  }
}

TEST_CASE("simulation output") {
  SimConfig cfg;
  cfg.sizes = {24, 16, 32};
  cfg.reps = 3;
  cfg.window = 3;
  cfg.seed = 5;
  cfg.threads = 1;
  const SimResult a = run_rate_simulation(cfg);

  SUBCASE("ordering and statistics") {
    REQUIRE(a.rows.size() == 9);
    CHECK(a.rows[0].n1 == 16);
    CHECK(a.rows[3].n1 == 24);
    CHECK(a.rows[8].rep == 2);
    REQUIRE(a.per_size.size() == 3);
    double mean = 0.0;
    for (int r = 0; r < 3; ++r) mean += a.rows[3 + r].mse / 3.0;
    CHECK(a.per_size[1].mean_mse == doctest::Approx(mean));
    CHECK(a.window_sizes == std::vector<Index>{16, 24, 32});
    std::vector<double> lx, ly;
    for (const SizeStats& s : a.per_size) {
      lx.push_back(std::log(static_cast<double>(s.n1 * s.n1)));
      ly.push_back(std::log(s.mean_mse));
      CHECK(s.violation_rate >= 0.0);
      CHECK(s.violation_rate <= 1.0);
    }
    CHECK(a.slope == doctest::Approx(fit_line(lx, ly).first));
    for (const SimRow& row : a.rows) CHECK(row.kkt_residual <= 1e-6);
  }
  SUBCASE("bitwise reproducible across thread counts") {
    SimConfig par = cfg;
    par.threads = 3;
    const SimResult b = run_rate_simulation(par);
    REQUIRE(b.rows.size() == a.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].mse == b.rows[i].mse);
    CHECK(a.slope == b.slope);
  }
  SUBCASE("different seeds give different noise") {
    // Small enough that the estimate is not identically zero.
    SimConfig mine = cfg;
    mine.rule = LambdaRule::kCustom;
    mine.lambda_value = 0.005;
    SimConfig other = mine;
    other.seed = 6;
    CHECK(run_rate_simulation(other).rows[0].mse != run_rate_simulation(mine).rows[0].mse);
  }
  SUBCASE("csv and json") {
    std::ostringstream csv;
    write_simulation_csv(csv, a);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "n1,n,rep,lambda,mse,bound,violated,converged,kkt_residual");
    int count = 0;
    while (std::getline(lines, line)) ++count;
    CHECK(count == 9);
    const nlohmann::json j = simulation_summary(cfg, a);
    CHECK(j["schema_version"] == kSimSchemaVersion);
    CHECK(j["per_size"].size() == 3);
    CHECK(j["config"]["lambda_rule"] == "paper-sim");
    CHECK(j["slope"].get<double>() == a.slope);
  }
}

TEST_CASE("plain estimator is null at small sizes") {
  // lambda = sqrt(log(2n)/(2n)) exceeds lambda_max of the noisy interaction
  // part here, so the fit is zero and the error is ||f0~||^2/n = 1/16.
  SimConfig cfg;
  cfg.sizes = {16, 32};
  cfg.reps = 3;
  const SimResult r = run_rate_simulation(cfg);
  for (const SimRow& row : r.rows) CHECK(row.mse == doctest::Approx(0.0625).epsilon(1e-12));
}

TEST_CASE("mean error decreases with size") {
  SimConfig cfg;
  cfg.scaling = PenaltyScaling::kStandardized;
  cfg.sizes = {16, 24, 32, 40, 48};
  cfg.reps = 4;
  cfg.seed = 11;
  const SimResult r = run_rate_simulation(cfg);
  CHECK(r.rank_correlation < 0.0);
  CHECK(r.slope < 0.0);
}

TEST_CASE("config files") {
  const nlohmann::json good = {{"sizes", {16, 32}}, {"reps", 2}, {"sigma", 1.0}, {"lambda_rule", "thm4"},
                               {"seed", 3}};
  const SimConfig cfg = sim_config_from_json(good);
  CHECK(cfg.sizes == std::vector<Index>{16, 32});
  CHECK(cfg.rule == LambdaRule::kThm4);
  CHECK(cfg.seed == 3);
  CHECK(sim_config_from_json(sim_config_to_json(cfg)).sizes == cfg.sizes);

  for (const char* field : {"sizes", "reps", "sigma", "lambda_rule", "seed"}) {
    nlohmann::json bad = good;
    bad.erase(field);
    try {
      sim_config_from_json(bad);
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find(field) != std::string::npos);
    }
  }
  nlohmann::json wrong = good;
  wrong["reps"] = "many";
  CHECK_THROWS_WITH_AS(sim_config_from_json(wrong), doctest::Contains("reps"), FormatError);
  wrong = good;
  wrong["lambda_rule"] = "custom";
  CHECK_THROWS_WITH_AS(sim_config_from_json(wrong), doctest::Contains("lambda_value"), FormatError);
  wrong = good;
  wrong["sizes"] = {10};
  CHECK_THROWS_AS(sim_config_from_json(wrong), FormatError);
}

TEST_CASE("oracle-bound Monte Carlo") {
  SUBCASE("noiseless checks never violate") {
    for (OracleTheorem th : {OracleTheorem::kThm4, OracleTheorem::kFastMain}) {
      OracleMcConfig cfg;
      cfg.theorem = th;
      cfg.n1 = 16;
      cfg.reps = 3;
      cfg.sigma = 0.0;
      const OracleMcResult r = verify_oracle_bound(cfg);
      CHECK(r.violations == 0);
      CHECK(r.failures == 0);
    }
  }
  SUBCASE("thm4 on 32x32") {
    OracleMcConfig cfg;
    cfg.reps = 10;
    const OracleMcResult r = verify_oracle_bound(cfg);
    CHECK(r.lambda == doctest::Approx(thm4_lambda(4.0, 1.0, 1024.0)));
    CHECK(r.probability == doctest::Approx(1.0 - 1.0 / 1024.0));
    CHECK(r.rate() <= 0.05);
  }
  SUBCASE("slow mesh uses an admissible lambda") {
    OracleMcConfig cfg;
    cfg.theorem = OracleTheorem::kSlowMesh;
    cfg.n1 = 40;
    cfg.reps = 5;
    const OracleMcResult r = verify_oracle_bound(cfg);
    const SlowRateConfig sc = slow_rate_config(1.0, 1600.0);
    CHECK(r.lambda_displayed == doctest::Approx(sc.lambda));
    CHECK(r.lambda == doctest::Approx(std::max(sc.lambda, sc.lambda_floor)));
    CHECK(r.rate() <= 0.05);
    cfg.n1 = 32;  // 32 is not divisible by t^2 + 1 = 5
    CHECK_THROWS_AS(verify_oracle_bound(cfg), DomainError);
  }
}
