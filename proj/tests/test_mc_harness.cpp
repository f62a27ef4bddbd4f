#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "extval/evt.hpp"
#include "extval/functionals.hpp"
#include "extval/mc_harness.hpp"
#include "extval/path_gen.hpp"
#include "extval/rng.hpp"
#include "extval/stats.hpp"
#include "extval/tail_models.hpp"

using doctest::Approx;
using extval::ExperimentConfig;
using extval::KRule;
using extval::NormOrder;
using extval::ProcessSpec;
using extval::ProductSpec;
using extval::RandomStream;
using extval::TailModel;
using extval::TailProbRule;

namespace {

ExperimentConfig direct_pareto_config() {
  ExperimentConfig config;
  config.source = TailModel::pareto(1.0);
  config.n = 50;
  config.k_rule = KRule::fixed(7);
  config.replications = 10;
  config.master_seed = 17;
  config.true_gamma = 1.0;
  config.true_rho = 0.0;
  return config;
}

ExperimentConfig ramp_paths_config() {
  ExperimentConfig config;
  config.source = ProductSpec{.multiplier = 1.0, .driver = ProcessSpec::ramp()};
  config.norm_order = NormOrder::finite(1.0);
  config.n = 5;
  config.m = 4;
  config.m_oracle = 4096;
  config.k_rule = KRule::fixed(2);
  config.replications = 2;
  config.master_seed = 3;
  config.true_gamma = 1.0;
  return config;
}

}  // namespace

TEST_CASE("k and tail_prob rules resolve and validate") {
  CHECK(KRule::fixed(70).resolve(5000) == 70);
  CHECK(KRule::power(0.5).resolve(5000) == 70);
  CHECK(KRule::power(0.5).resolve(100) == 10);
  CHECK(KRule::power(0.5).resolve(2) == 1);
  CHECK_THROWS_AS((void)KRule::fixed(0), extval::ConfigError);
  CHECK_THROWS_AS((void)KRule::power(0.0), extval::ConfigError);
  CHECK_THROWS_AS((void)KRule::power(1.0), extval::ConfigError);
  CHECK_THROWS_AS((void)KRule::fixed(100).resolve(100), extval::ConfigError);

  CHECK(TailProbRule::fixed(0.5).resolve(100) == 0.5);
  CHECK(TailProbRule::one_over_n().resolve(100) == 0.01);
  CHECK(TailProbRule::c_over_n(5.0).resolve(100) == 0.05);
  CHECK_THROWS_AS((void)TailProbRule::fixed(0.0), extval::ConfigError);
  CHECK_THROWS_AS((void)TailProbRule::fixed(1.0), extval::ConfigError);
  CHECK_THROWS_AS((void)TailProbRule::c_over_n(0.0), extval::ConfigError);
  CHECK_THROWS_AS((void)TailProbRule::c_over_n(200.0).resolve(100),
                  extval::ConfigError);
}

TEST_CASE("config validation catches contract violations") {
  ExperimentConfig base = direct_pareto_config();
  CHECK_NOTHROW(base.validate());

  ExperimentConfig bad = base;
  bad.n = 1;
  CHECK_THROWS_AS(bad.validate(), extval::ConfigError);

  bad = base;
  bad.replications = 0;
  CHECK_THROWS_AS(bad.validate(), extval::ConfigError);

  bad = base;
  bad.true_gamma = 0.0;
  CHECK_THROWS_AS(bad.validate(), extval::ConfigError);

  bad = base;
  bad.true_rho = 0.5;
  CHECK_THROWS_AS(bad.validate(), extval::ConfigError);

  bad = base;
  bad.ci_level = 1.0;
  CHECK_THROWS_AS(bad.validate(), extval::ConfigError);

  bad = base;
  bad.negligibility_threshold = 0.0;
  CHECK_THROWS_AS(bad.validate(), extval::ConfigError);

  bad = base;
  bad.workers = -1;
  CHECK_THROWS_AS(bad.validate(), extval::ConfigError);

  ExperimentConfig paths = ramp_paths_config();
  CHECK_NOTHROW(paths.validate());

  ExperimentConfig bad_paths = paths;
  bad_paths.m = 1;
  CHECK_THROWS_AS(bad_paths.validate(), extval::ConfigError);

  bad_paths = paths;
  bad_paths.m_oracle = 10;  // not a multiple of m=4
  CHECK_THROWS_AS(bad_paths.validate(), extval::ConfigError);

  bad_paths = paths;
  bad_paths.source =
      ProductSpec{.multiplier = 1.0, .driver = ProcessSpec::constant(1.0)};
  CHECK_THROWS_AS(bad_paths.validate(), extval::ConfigError);

  bad_paths = paths;
  bad_paths.mc_quantile_reference = true;
  bad_paths.mc_quantile_draws = 10;
  CHECK_THROWS_AS(bad_paths.validate(), extval::ConfigError);
}

TEST_CASE("lint warnings flag regime violations without failing") {
  ExperimentConfig config = direct_pareto_config();
  config.n = 100;
  config.k_rule = KRule::fixed(10);
  config.tail_prob_rule = TailProbRule::fixed(0.5);
  config.replications = 50;
  const std::vector<std::string> warnings = config.lint_warnings();
  REQUIRE(warnings.size() >= 2);
  bool saw_np = false;
  bool saw_reps = false;
  for (const std::string& w : warnings) {
    if (w.find("np = o(k)") != std::string::npos) saw_np = true;
    if (w.find("replications < 100") != std::string::npos) saw_reps = true;
  }
  CHECK(saw_np);
  CHECK(saw_reps);

  ExperimentConfig clean = direct_pareto_config();
  clean.n = 5000;
  clean.k_rule = KRule::power(0.5);
  clean.replications = 400;
  CHECK(clean.lint_warnings().empty());

  ExperimentConfig shallow = ramp_paths_config();
  shallow.m_oracle = 8;  // only 2x the coarse grid
  shallow.replications = 200;
  bool saw_oracle = false;
  bool saw_lambda = false;
  for (const std::string& w : shallow.lint_warnings()) {
    if (w.find("m_oracle") != std::string::npos) saw_oracle = true;
    if (w.find("lambda_limit") != std::string::npos) saw_lambda = true;
  }
  CHECK(saw_oracle);
  CHECK(saw_lambda);
}

TEST_CASE("resolved_lambda_limit uses the closed-form second-order rate") {
  ExperimentConfig burr;
  burr.source = TailModel::burr(1.0, 2.0);
  burr.n = 20000;
  burr.k_rule = KRule::fixed(200);
  burr.true_gamma = 0.5;
  burr.true_rho = -0.5;
  // sqrt(200) * A(100) with A(t) = 0.5 t^{-1/2}.
  CHECK(burr.resolved_lambda_limit() ==
        Approx(0.7071067811865476).epsilon(1e-14));

  ExperimentConfig pareto = direct_pareto_config();
  CHECK(pareto.resolved_lambda_limit() == 0.0);

  ExperimentConfig paths = ramp_paths_config();
  CHECK(paths.resolved_lambda_limit() == 0.0);

  burr.lambda_limit = 0.3;
  CHECK(burr.resolved_lambda_limit() == 0.3);
}

TEST_CASE("direct mode has zero discretization error by construction") {
  const ExperimentConfig config = direct_pareto_config();
  const extval::ReplicationResult rep = extval::run_replication(config, 0);
  REQUIRE_FALSE(rep.failed);
  CHECK(rep.c_n == 0.0);
  CHECK(rep.max_abs_err == 0.0);
  CHECK(rep.k_ratio == 0.0);
  CHECK(rep.gamma_hat == rep.gamma_hat_oracle);
  CHECK(rep.x_hat == rep.x_hat_oracle);
  CHECK(rep.threshold == rep.threshold_oracle);
  CHECK(rep.proof_chain_applicable);
  CHECK(rep.proof_chain_ok);
  CHECK(rep.gamma_hat > 0.0);
  CHECK(rep.threshold > 0.0);
  CHECK(rep.ci_lo < rep.ci_hi);
  CHECK(std::isfinite(rep.rel_quantile_err));
  // x_ref in direct mode is the model's closed-form quantile U(1/p) = 50.
  CHECK(rep.rel_quantile_err == Approx(std::abs(rep.x_hat / 50.0 - 1.0)));
}

TEST_CASE("replications are reproducible and indexed") {
  const ExperimentConfig config = direct_pareto_config();
  const extval::ReplicationResult a = extval::run_replication(config, 3);
  const extval::ReplicationResult b = extval::run_replication(config, 3);
  CHECK(a.gamma_hat == b.gamma_hat);
  CHECK(a.x_hat == b.x_hat);
  CHECK(a.std_gamma_err == b.std_gamma_err);
  CHECK(a.std_quant_err == b.std_quant_err);
  CHECK(a.ci_lo == b.ci_lo);

  const extval::ReplicationResult other = extval::run_replication(config, 4);
  CHECK(other.gamma_hat != a.gamma_hat);

  CHECK_THROWS_AS((void)extval::run_replication(config, 10), extval::ConfigError);
}

TEST_CASE("deterministic ramp product hits the closed-form grid error") {
  const ExperimentConfig config = ramp_paths_config();
  const extval::ReplicationResult rep = extval::run_replication(config, 0);
  REQUIRE_FALSE(rep.failed);

  // Coarse norm: mean of {0, .25, .5, .75} = 0.375. Oracle norm at m=4096:
  // (m-1)/(2m) = 0.4998779296875. All rows identical, so the Hill slope is 0.
  CHECK(rep.threshold == Approx(0.375).epsilon(1e-13));
  CHECK(rep.threshold_oracle == Approx(0.4998779296875).epsilon(1e-13));
  CHECK(rep.max_abs_err == Approx(0.1248779296875).epsilon(1e-12));
  CHECK(rep.gamma_hat == 0.0);
  CHECK(rep.gamma_hat_oracle == 0.0);
  CHECK(rep.x_hat == rep.threshold);  // d_n^0 = 1
  CHECK(rep.c_n == rep.max_abs_err / rep.threshold_oracle);
  CHECK(rep.k_ratio == rep.c_n);
  CHECK(rep.proof_chain_applicable);  // K is about 0.25
  CHECK(rep.proof_chain_ok);
}

TEST_CASE("paths-mode replication decomposes into the public primitives") {
  ExperimentConfig config;
  config.source = ProductSpec{.multiplier = TailModel::pareto(0.5),
                              .driver = ProcessSpec::brownian()};
  config.norm_order = NormOrder::sup();
  config.n = 40;
  config.m = 16;
  config.m_oracle = 128;
  config.k_rule = KRule::fixed(6);
  config.replications = 3;
  config.master_seed = 55;
  config.true_gamma = 0.5;

  const std::size_t rep_index = 1;
  const extval::ReplicationResult rep = extval::run_replication(config, rep_index);
  REQUIRE_FALSE(rep.failed);

  // The replication stream is fork(kReplication).fork(rep_index); product
  // simulation over that stream regenerates the identical fine paths.
  const RandomStream rep_stream = RandomStream(config.master_seed)
                                      .fork(extval::stream_tag::kReplication)
                                      .fork(rep_index);
  const extval::PathMatrix fine = extval::simulate_product(
      *config.product(), config.m_oracle, config.n, rep_stream);
  std::vector<double> coarse(config.n), oracle(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    const extval::NestedNorms norms =
        extval::nested_norms(fine.row(i), config.m, config.norm_order);
    coarse[i] = norms.coarse;
    oracle[i] = norms.oracle;
  }
  const extval::HillEstimate est =
      extval::hill(extval::order_statistics(coarse), 6);
  const extval::HillEstimate est_oracle =
      extval::hill(extval::order_statistics(oracle), 6);
  CHECK(rep.gamma_hat == est.gamma_hat);
  CHECK(rep.gamma_hat_oracle == est_oracle.gamma_hat);
  CHECK(rep.threshold == est.threshold);

  double max_err = 0.0;
  for (std::size_t i = 0; i < config.n; ++i) {
    max_err = std::max(max_err, std::abs(coarse[i] - oracle[i]));
  }
  CHECK(rep.max_abs_err == max_err);
  CHECK(rep.c_n == max_err / est_oracle.threshold);
}

TEST_CASE("single-replication experiments fold to the replication itself") {
  ExperimentConfig config = direct_pareto_config();
  config.replications = 1;
  const extval::ExperimentResult result = extval::run_experiment_serial(config);
  REQUIRE(result.table.size() == 1);
  const extval::ReplicationResult& rep = result.table[0];
  CHECK(result.summary.usable_replications == 1);
  CHECK(result.summary.replication_failures == 0);
  CHECK(result.summary.mean_gamma_hat == rep.gamma_hat);
  CHECK(result.summary.mean_bias == rep.gamma_hat - 1.0);
  CHECK(result.summary.rmse == Approx(std::abs(rep.gamma_hat - 1.0)));
  CHECK(std::isnan(result.summary.empirical_sd_of_standardized));
  CHECK(result.summary.c_n_median == rep.c_n);
  CHECK(result.summary.k_used == 7);
  CHECK(result.summary.tail_prob_used == 0.02);
  CHECK(result.summary.d_n == 7.0);
  CHECK(result.summary.ks_p_value >= 0.0);
  CHECK(result.summary.ks_p_value <= 1.0);
}

TEST_CASE("experiment summaries recover the Pareto limit behavior") {
  ExperimentConfig config;
  config.source = TailModel::pareto(1.0);
  config.n = 2000;
  config.k_rule = KRule::power(0.5);  // k = 44
  config.replications = 150;
  config.master_seed = 314;
  config.true_gamma = 1.0;
  config.true_rho = 0.0;
  const extval::ExperimentResult result = extval::run_experiment(config);
  const extval::ExperimentSummary& s = result.summary;
  CHECK(s.usable_replications == 150);
  CHECK(s.k_used == 44);
  CHECK(s.mean_gamma_hat > 0.9);
  CHECK(s.mean_gamma_hat < 1.1);
  CHECK(s.empirical_sd_of_standardized > 0.8);
  CHECK(s.empirical_sd_of_standardized < 1.2);
  CHECK(s.ks_p_value > 0.01);
  CHECK(s.ci_coverage > 0.85);
  CHECK(s.ci_coverage <= 1.0);
  CHECK(s.c_n_median == 0.0);
  CHECK(s.c_n_p90 == 0.0);
  CHECK(s.lambda_limit_used == 0.0);
}

TEST_CASE("experiments are reproducible and seed-sensitive") {
  ExperimentConfig config;
  config.source = ProductSpec{.multiplier = TailModel::pareto(0.5),
                              .driver = ProcessSpec::brownian()};
  config.norm_order = NormOrder::sup();
  config.n = 80;
  config.m = 16;
  config.m_oracle = 128;
  config.replications = 20;
  config.master_seed = 8;
  config.true_gamma = 0.5;

  const extval::ExperimentResult a = extval::run_experiment(config);
  const extval::ExperimentResult b = extval::run_experiment(config);
  CHECK(a.summary.mean_gamma_hat == b.summary.mean_gamma_hat);
  CHECK(a.summary.ks_p_value == b.summary.ks_p_value);
  CHECK(a.summary.c_n_median == b.summary.c_n_median);
  CHECK(a.summary.max_abs_err_median == b.summary.max_abs_err_median);

  config.master_seed = 9;
  const extval::ExperimentResult c = extval::run_experiment(config);
  CHECK(c.summary.mean_gamma_hat != a.summary.mean_gamma_hat);
}

TEST_CASE("ks_test worked example and guards") {
  const std::vector<double> three{-1.0, 0.0, 1.0};
  const auto [d, p] = extval::ks_test(three, extval::limit_law(0.0, -1.0, 1.0));
  CHECK(d == Approx(0.1746780794018763).epsilon(1e-12));
  CHECK(p > 0.9);
  CHECK(p <= 1.0);

  CHECK_THROWS_AS((void)extval::ks_test(std::vector<double>{},
                                        extval::limit_law(0.0, -1.0, 1.0)),
                  std::invalid_argument);
  extval::LimitLaw degenerate{0.0, 0.0, 0.0, 0.0, 0.0};
  CHECK_THROWS_AS((void)extval::ks_test(three, degenerate),
                  std::invalid_argument);
}

TEST_CASE("ks_test accepts its own reference quantile grid") {
  const extval::LimitLaw law = extval::limit_law(0.5, -1.0, 2.0);
  const std::size_t count = 1000;
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    grid[i] = law.mean + law.sd() * extval::normal_quantile(u);
  }
  const auto [d, p] = extval::ks_test(grid, law);
  CHECK(d <= 0.001);
  CHECK(p > 0.99);
}

TEST_CASE("ks_test is invariant under the reference affine rescale") {
  RandomStream rng(21);
  std::vector<double> raw(200);
  for (double& v : raw) v = 3.0 + 2.0 * rng.normal();

  const auto [d1, p1] = extval::ks_test(raw, extval::limit_law(3.0, 0.0, 2.0));
  std::vector<double> standardized(raw);
  for (double& v : standardized) v = (v - 3.0) / 2.0;
  const auto [d2, p2] =
      extval::ks_test(standardized, extval::limit_law(0.0, 0.0, 1.0));
  CHECK(d1 == d2);
  CHECK(p1 == p2);
}

TEST_CASE("replication failures below the ceiling are recorded as data") {
  // gamma = 100: the Burr quantile overflows to +inf for roughly one draw in
  // 1200, so a few replications fail their Hill fit and are excluded.
  ExperimentConfig config;
  config.source = TailModel::burr(0.01, 1.0);
  config.n = 60;
  config.k_rule = KRule::fixed(5);
  config.replications = 20;
  config.master_seed = 12345;
  config.true_gamma = 100.0;
  config.true_rho = -1.0;

  const extval::ExperimentResult result = extval::run_experiment_serial(config);
  CHECK(result.summary.replication_failures == 1);
  CHECK(result.summary.usable_replications == 19);
  bool saw_failure_record = false;
  for (const extval::ReplicationResult& rep : result.table) {
    if (rep.failed) {
      saw_failure_record = true;
      CHECK(rep.failure.find("non-finite") != std::string::npos);
    }
  }
  CHECK(saw_failure_record);
}

TEST_CASE("breaching the failure ceiling aborts the experiment") {
  // gamma = 500 overflows a fifth of all draws; no replication survives.
  ExperimentConfig config;
  config.source = TailModel::burr(0.002, 1.0);
  config.n = 60;
  config.k_rule = KRule::fixed(5);
  config.replications = 20;
  config.master_seed = 7;
  config.true_gamma = 500.0;
  config.true_rho = -1.0;

  try {
    (void)extval::run_experiment_serial(config);
    FAIL("expected ExperimentFailure");
  } catch (const extval::ExperimentFailure& err) {
    const std::string what = err.what();
    CHECK(what.find("failure ceiling") != std::string::npos);
    CHECK(what.find("first failure") != std::string::npos);
  }
}

TEST_CASE("mc quantile reference brackets a deterministic product") {
  ExperimentConfig config;
  config.source = ProductSpec{.multiplier = TailModel::pareto(0.5),
                              .driver = ProcessSpec::ramp()};
  config.norm_order = NormOrder::sup();
  config.n = 50;
  config.m = 8;
  config.m_oracle = 64;
  config.k_rule = KRule::fixed(7);
  config.replications = 10;
  config.master_seed = 40;
  config.true_gamma = 0.5;
  config.mc_quantile_reference = true;
  config.mc_quantile_draws = 200000;
  config.mc_quantile_pool = 50;

  const extval::ExperimentResult result = extval::run_experiment(config);
  const extval::ExperimentSummary& s = result.summary;
  REQUIRE(std::isfinite(s.x_p_mc));
  CHECK(s.x_p_mc_band_lo <= s.x_p_mc);
  CHECK(s.x_p_mc <= s.x_p_mc_band_hi);
  CHECK(std::isfinite(s.median_rel_err_vs_mc));

  // ||Z||_sup of the ramp is 63/64 deterministically, so the reference
  // quantile is U_R(n) * 63/64 = sqrt(50) * 0.984375 up to MC error.
  const double truth = std::sqrt(50.0) * 63.0 / 64.0;
  CHECK(s.x_p_mc == Approx(truth).epsilon(0.05));

  const extval::ExperimentResult again = extval::run_experiment(config);
  CHECK(again.summary.x_p_mc == s.x_p_mc);
  CHECK(again.summary.median_rel_err_vs_mc == s.median_rel_err_vs_mc);
}

TEST_CASE("sweep cells are independent reseeded experiments") {
  ExperimentConfig base;
  base.source = TailModel::pareto(1.0);
  base.n = 400;
  base.k_rule = KRule::power(0.5);
  base.replications = 30;
  base.master_seed = 99;
  base.true_gamma = 1.0;

  const std::vector<double> values{8.0};
  const extval::SweepResult swept = extval::sweep(base, extval::SweepAxis::K, values);
  REQUIRE(swept.cells.size() == 1);
  REQUIRE_FALSE(swept.cells[0].failed);
  CHECK(swept.cells[0].axis_value == 8.0);

  // A cell is exactly run_experiment of the base with the axis applied and
  // the seed derived from (master_seed, axis, value).
  ExperimentConfig effective = base;
  effective.k_rule = KRule::fixed(8);
  effective.master_seed =
      RandomStream(base.master_seed)
          .fork(extval::stream_tag::kSweepAxis)
          .fork(static_cast<std::uint64_t>(extval::SweepAxis::K))
          .fork(8)
          .next_u64();
  const extval::ExperimentResult expected = extval::run_experiment(effective);
  const extval::ExperimentResult& got = swept.cells[0].result;
  CHECK(got.summary.mean_gamma_hat == expected.summary.mean_gamma_hat);
  CHECK(got.summary.ks_p_value == expected.summary.ks_p_value);
  CHECK(got.summary.rmse == expected.summary.rmse);
  REQUIRE(got.table.size() == expected.table.size());
  for (std::size_t r = 0; r < got.table.size(); ++r) {
    CHECK(got.table[r].gamma_hat == expected.table[r].gamma_hat);
  }
}

TEST_CASE("sweep validation and per-cell failure capture") {
  ExperimentConfig base;
  base.source = TailModel::pareto(1.0);
  base.n = 400;
  base.replications = 10;
  base.master_seed = 5;

  CHECK_THROWS_AS((void)extval::sweep(base, extval::SweepAxis::K,
                                      std::vector<double>{}),
                  extval::ConfigError);

  const extval::SweepResult fractional =
      extval::sweep(base, extval::SweepAxis::K, std::vector<double>{2.5});
  REQUIRE(fractional.cells.size() == 1);
  CHECK(fractional.cells[0].failed);
  CHECK(fractional.cells[0].error.find("positive integer") != std::string::npos);

  const extval::SweepResult no_paths =
      extval::sweep(base, extval::SweepAxis::M, std::vector<double>{16.0});
  REQUIRE(no_paths.cells.size() == 1);
  CHECK(no_paths.cells[0].failed);
  CHECK(no_paths.cells[0].error.find("paths-mode") != std::string::npos);

  // A bad cell does not poison its neighbors.
  const extval::SweepResult mixed = extval::sweep(
      base, extval::SweepAxis::K, std::vector<double>{400.0, 20.0});
  REQUIRE(mixed.cells.size() == 2);
  CHECK(mixed.cells[0].failed);  // k = n lands outside [1, n-1]
  CHECK_FALSE(mixed.cells[1].failed);
}

TEST_CASE("rmse improves along an n sweep") {
  ExperimentConfig base;
  base.source = TailModel::pareto(1.0);
  base.k_rule = KRule::power(0.5);
  base.replications = 60;
  base.master_seed = 11;
  base.true_gamma = 1.0;
  base.true_rho = 0.0;

  const std::vector<double> values{500.0, 5000.0};
  const extval::SweepResult swept =
      extval::sweep(base, extval::SweepAxis::N, values);
  REQUIRE(swept.cells.size() == 2);
  REQUIRE_FALSE(swept.cells[0].failed);
  REQUIRE_FALSE(swept.cells[1].failed);
  CHECK(swept.cells[1].result.summary.rmse <
        swept.cells[0].result.summary.rmse);
}

TEST_CASE("grid refinement shrinks the normalized error along an m sweep") {
  ExperimentConfig base;
  base.source = ProductSpec{.multiplier = TailModel::pareto(0.5),
                            .driver = ProcessSpec::ramp()};
  base.norm_order = NormOrder::finite(1.0);
  base.n = 100;
  base.m = 4;
  base.m_oracle = 1024;
  base.k_rule = KRule::power(0.5);
  base.replications = 40;
  base.master_seed = 23;
  base.true_gamma = 0.5;

  const std::vector<double> values{4.0, 16.0, 64.0};
  const extval::SweepResult swept =
      extval::sweep(base, extval::SweepAxis::M, values);
  REQUIRE(swept.cells.size() == 3);
  double previous = std::numeric_limits<double>::infinity();
  for (const extval::SweepCell& cell : swept.cells) {
    REQUIRE_FALSE(cell.failed);
    CHECK(cell.result.summary.c_n_median < previous);
    previous = cell.result.summary.c_n_median;
  }
}

TEST_CASE("replication table CSV has the documented layout") {
  ExperimentConfig config = direct_pareto_config();
  config.replications = 3;
  const extval::ExperimentResult result = extval::run_experiment_serial(config);
  std::ostringstream out;
  extval::write_replication_csv(out, result, "note");
  std::istringstream lines(out.str());
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "# note");
  REQUIRE(std::getline(lines, line));
  CHECK(line ==
        "rep_index,gamma_hat,gamma_hat_oracle,x_hat,x_hat_oracle,c_n,"
        "std_gamma_err,std_quant_err,failed");
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 8);
    ++rows;
  }
  CHECK(rows == 3);
}
