#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <utility>

#include "doctest.h"
#include "extval/config.hpp"
#include "extval/mc_harness.hpp"

using extval::ConfigError;
using extval::ExperimentConfig;
using extval::ordered_json;

namespace {

ordered_json parse_json(const char* text) { return ordered_json::parse(text); }

ExperimentConfig parse_experiment(const char* text) {
  return extval::parse_experiment_config(parse_json(text));
}

std::string error_of(const char* text) {
  try {
    (void)extval::parse_experiment_config(parse_json(text));
  } catch (const ConfigError& err) {
    return err.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal direct-mode config fills the documented defaults") {
  const ExperimentConfig config = parse_experiment(R"({
    "model": {"family": "pareto", "gamma": 1.0},
    "n": 5000,
    "true_gamma": 1.0
  })");
  CHECK(config.direct_mode());
  CHECK(config.direct_model()->gamma() == 1.0);
  CHECK(config.n == 5000);
  CHECK(config.k_rule.kind == extval::KRule::Kind::Power);
  CHECK(config.k_rule.lambda_exp == 0.5);
  CHECK(config.tail_prob_rule.kind == extval::TailProbRule::Kind::OneOverN);
  CHECK(config.replications == 100);
  CHECK(config.master_seed == 1);
  CHECK_FALSE(config.true_rho.has_value());
  CHECK_FALSE(config.lambda_limit.has_value());
  CHECK(config.ci_level == 0.95);
  CHECK(config.negligibility_threshold == 0.1);
  CHECK(config.workers == 0);
  CHECK_FALSE(config.mc_quantile_reference);
}

TEST_CASE("paths-mode config parses the product block") {
  const ExperimentConfig config = parse_experiment(R"({
    "product": {
      "multiplier": {"family": "pareto", "gamma": 0.4},
      "driver": {"kind": "fbm", "hurst": 0.7, "method": "cholesky"}
    },
    "norm_order": 2,
    "n": 2000,
    "m": 16,
    "m_oracle": 1024,
    "k_rule": {"type": "power", "lambda": 0.5},
    "tail_prob_rule": {"type": "c_over_n", "c": 2.0},
    "replications": 50,
    "master_seed": 9,
    "true_gamma": 0.4,
    "true_rho": "unknown",
    "lambda_limit": "auto",
    "workers": 4
  })");
  REQUIRE_FALSE(config.direct_mode());
  const extval::ProductSpec& product = *config.product();
  CHECK(product.driver.kind == extval::ProcessKind::FractionalBrownianMotion);
  CHECK(product.driver.hurst == 0.7);
  CHECK(product.driver.method == extval::FbmMethod::DenseCholesky);
  CHECK(product.driver.holder_exponent == 0.7);
  CHECK(std::get<extval::TailModel>(product.multiplier).gamma() == 0.4);
  CHECK(config.norm_order.p() == 2.0);
  CHECK(config.m == 16);
  CHECK(config.m_oracle == 1024);
  CHECK(config.tail_prob_rule.kind == extval::TailProbRule::Kind::COverN);
  CHECK_FALSE(config.true_rho.has_value());
  CHECK_FALSE(config.lambda_limit.has_value());
  CHECK(config.workers == 4);
}

TEST_CASE("string and numeric forms of norm_order and true_rho") {
  ExperimentConfig config = parse_experiment(R"({
    "model": {"family": "pareto", "gamma": 1.0},
    "norm_order": "inf",
    "n": 100, "true_gamma": 1.0, "true_rho": -0.5, "lambda_limit": 0.25
  })");
  CHECK(config.norm_order.is_sup());
  CHECK(config.true_rho == -0.5);
  CHECK(config.lambda_limit == 0.25);

  config = parse_experiment(R"({
    "model": {"family": "pareto", "gamma": 1.0},
    "norm_order": "2",
    "n": 100, "true_gamma": 1.0
  })");
  CHECK(config.norm_order.p() == 2.0);
}

TEST_CASE("config errors name the offending key and location") {
  std::string err = error_of(R"({
    "model": {"family": "pareto", "gamma": 1.0},
    "n": 100, "true_gamma": 1.0, "modell": 3
  })");
  CHECK(err.find("unknown key 'modell'") != std::string::npos);
  CHECK(err.find("allowed:") != std::string::npos);

  err = error_of(R"({
    "model": {"family": "pareto", "gamma": 1.0},
    "k_rule": {"type": "fixed", "k": 5, "x": 1},
    "n": 100, "true_gamma": 1.0
  })");
  CHECK(err.find("experiment.k_rule") != std::string::npos);
  CHECK(err.find("unknown key 'x'") != std::string::npos);

  err = error_of(R"({"n": 100, "true_gamma": 1.0})");
  CHECK(err.find("exactly one of 'model'") != std::string::npos);

  err = error_of(R"({
    "model": {"family": "pareto", "gamma": 1.0},
    "product": {"multiplier": {"fixed": 1.0}, "driver": {"kind": "ramp"}},
    "n": 100, "true_gamma": 1.0
  })");
  CHECK(err.find("exactly one of 'model'") != std::string::npos);

  err = error_of(R"({
    "model": {"family": "pareto", "gamma": 1.0},
    "n": 100, "true_gamma": 1.0, "true_rho": "soon"
  })");
  CHECK(err.find("true_rho") != std::string::npos);
  CHECK(err.find("'unknown'") != std::string::npos);

  err = error_of(R"({
    "model": {"family": "pareto", "gamma": 1.0},
    "n": 100, "true_gamma": 1.0, "lambda_limit": "none"
  })");
  CHECK(err.find("lambda_limit") != std::string::npos);

  err = error_of(R"({
    "model": {"family": "pareto", "gamma": 1.0},
    "n": -5, "true_gamma": 1.0
  })");
  CHECK(err.find("experiment.n") != std::string::npos);

  err = error_of(R"({
    "model": {"family": "pareto", "gamma": 1.0},
    "n": 100, "true_gamma": 1.0, "master_seed": -1
  })");
  CHECK(err.find("master_seed") != std::string::npos);

  err = error_of(R"({
    "model": {"family": "wibble", "gamma": 1.0},
    "n": 100, "true_gamma": 1.0
  })");
  CHECK(err.find("unknown family 'wibble'") != std::string::npos);
}

TEST_CASE("tail model parameters are cross-checked when redundant") {
  // Burr(tau=1, lambda_shape=2) has gamma = 0.5 and rho = -0.5.
  const ExperimentConfig ok = parse_experiment(R"({
    "model": {"family": "burr", "tau": 1.0, "lambda_shape": 2.0,
              "gamma": 0.5, "rho": -0.5},
    "n": 100, "true_gamma": 0.5
  })");
  CHECK(ok.direct_model()->gamma() == 0.5);

  std::string err = error_of(R"({
    "model": {"family": "burr", "tau": 1.0, "lambda_shape": 2.0, "gamma": 0.6},
    "n": 100, "true_gamma": 0.5
  })");
  CHECK(err.find("inconsistent") != std::string::npos);

  err = error_of(R"({
    "model": {"family": "frechet", "gamma": 1.0, "rho": -0.5},
    "n": 100, "true_gamma": 1.0
  })");
  CHECK(err.find("inconsistent") != std::string::npos);

  CHECK_NOTHROW(parse_experiment(R"({
    "model": {"family": "frechet", "gamma": 1.0, "rho": -1.0},
    "n": 100, "true_gamma": 1.0
  })"));
}

TEST_CASE("simulate config parses and validates") {
  const extval::SimulateConfig config =
      extval::parse_simulate_config(parse_json(R"({
        "product": {"multiplier": {"fixed": 2.0}, "driver": {"kind": "ramp"}},
        "m": 8, "n": 3, "master_seed": 5
      })"));
  CHECK(config.m == 8);
  CHECK(config.n == 3);
  CHECK(config.master_seed == 5);
  CHECK(std::get<double>(config.product.multiplier) == 2.0);

  CHECK_THROWS_AS((void)extval::parse_simulate_config(
                      parse_json(R"({"m": 8, "n": 3})")),
                  ConfigError);
  CHECK_THROWS_AS(
      (void)extval::parse_simulate_config(parse_json(R"({
        "product": {"multiplier": {"fixed": 2.0}, "driver": {"kind": "ramp"}},
        "m": 8, "n": 3, "replications": 4
      })")),
      ConfigError);
  CHECK_THROWS_AS(
      (void)extval::parse_simulate_config(parse_json(R"({
        "product": {"multiplier": {"fixed": -2.0}, "driver": {"kind": "ramp"}},
        "m": 8, "n": 3
      })")),
      ConfigError);
}

TEST_CASE("sweep spec parses its axis and values") {
  const extval::SweepSpec spec = extval::parse_sweep_spec(parse_json(R"({
    "axis": "m", "values": [16, 64, 256]
  })"));
  CHECK(spec.axis == extval::SweepAxis::M);
  REQUIRE(spec.values.size() == 3);
  CHECK(spec.values[1] == 64.0);

  CHECK(extval::parse_sweep_spec(parse_json(R"({"axis": "k", "values": [5]})"))
            .axis == extval::SweepAxis::K);
  CHECK(extval::parse_sweep_spec(parse_json(R"({"axis": "n", "values": [5]})"))
            .axis == extval::SweepAxis::N);

  CHECK_THROWS_AS(
      (void)extval::parse_sweep_spec(parse_json(R"({"axis": "p", "values": [1]})")),
      ConfigError);
  CHECK_THROWS_AS(
      (void)extval::parse_sweep_spec(parse_json(R"({"axis": "m", "values": []})")),
      ConfigError);
  CHECK_THROWS_AS(
      (void)extval::parse_sweep_spec(
          parse_json(R"({"axis": "m", "values": [16, "x"]})")),
      ConfigError);
}

TEST_CASE("whole-file parsers reject sections of other subcommands") {
  const ordered_json experiment_only = parse_json(R"({
    "experiment": {"model": {"family": "pareto", "gamma": 1.0},
                   "n": 100, "true_gamma": 1.0}
  })");
  CHECK(extval::experiment_from_root(experiment_only).n == 100);
  CHECK_THROWS_AS((void)extval::sweep_from_root(experiment_only), ConfigError);
  CHECK_THROWS_AS((void)extval::simulate_from_root(experiment_only), ConfigError);

  const ordered_json with_sweep = parse_json(R"({
    "experiment": {"model": {"family": "pareto", "gamma": 1.0},
                   "n": 100, "true_gamma": 1.0},
    "sweep": {"axis": "k", "values": [5, 9]}
  })");
  CHECK_THROWS_AS((void)extval::experiment_from_root(with_sweep), ConfigError);
  const auto [base, spec] = extval::sweep_from_root(with_sweep);
  CHECK(base.n == 100);
  CHECK(spec.values.size() == 2);

  CHECK_THROWS_AS((void)extval::experiment_from_root(parse_json(R"({})")),
                  ConfigError);
}

TEST_CASE("load_config_file reports path and parse position") {
  namespace fs = std::filesystem;
  const fs::path missing = fs::temp_directory_path() / "extval_no_such.json";
  CHECK_THROWS_AS((void)extval::load_config_file(missing.string()), ConfigError);

  const fs::path bad = fs::temp_directory_path() / "extval_bad_config.json";
  {
    std::ofstream out(bad);
    out << "{ not json";
  }
  try {
    (void)extval::load_config_file(bad.string());
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find(bad.string()) != std::string::npos);
  }
  fs::remove(bad);
}

TEST_CASE("config echo is a canonical fixed point") {
  const char* direct_text = R"({
    "model": {"family": "burr", "tau": 1.0, "lambda_shape": 2.0},
    "n": 20000,
    "k_rule": {"type": "fixed", "k": 200},
    "tail_prob_rule": {"type": "one_over_n"},
    "replications": 300,
    "master_seed": 20260814,
    "true_gamma": 0.5,
    "true_rho": -0.5,
    "lambda_limit": "auto"
  })";
  const ordered_json echo1 =
      extval::experiment_config_to_json(parse_experiment(direct_text));
  ordered_json wrapped;
  wrapped["experiment"] = echo1;
  const ordered_json echo2 =
      extval::experiment_config_to_json(extval::experiment_from_root(wrapped));
  CHECK(echo1.dump() == echo2.dump());

  const char* paths_text = R"({
    "product": {
      "multiplier": {"family": "pareto", "gamma": 0.4},
      "driver": {"kind": "fbm", "hurst": 0.3}
    },
    "norm_order": "inf",
    "n": 2000, "m": 16, "m_oracle": 16384,
    "true_gamma": 0.4,
    "mc_quantile_reference": true,
    "mc_quantile_draws": 100000,
    "mc_quantile_pool": 2000
  })";
  const ordered_json paths_echo1 =
      extval::experiment_config_to_json(parse_experiment(paths_text));
  ordered_json paths_wrapped;
  paths_wrapped["experiment"] = paths_echo1;
  const ordered_json paths_echo2 = extval::experiment_config_to_json(
      extval::experiment_from_root(paths_wrapped));
  CHECK(paths_echo1.dump() == paths_echo2.dump());
  CHECK(paths_echo1.contains("mc_quantile_draws"));
}

TEST_CASE("config echo omits workers so equal work serializes equally") {
  ExperimentConfig a = parse_experiment(R"({
    "model": {"family": "pareto", "gamma": 1.0},
    "n": 100, "true_gamma": 1.0, "workers": 1
  })");
  ExperimentConfig b = a;
  b.workers = 8;
  CHECK(extval::experiment_config_to_json(a).dump() ==
        extval::experiment_config_to_json(b).dump());
  const ordered_json echo = extval::experiment_config_to_json(a);
  CHECK_FALSE(echo.contains("workers"));
  CHECK_FALSE(echo.contains("m"));
  CHECK_FALSE(echo.contains("norm_order"));
  CHECK_FALSE(echo.contains("mc_quantile_reference"));
}

TEST_CASE("json_number applies the 12-digit policy and null for non-finite") {
  CHECK(extval::json_number(std::nan("")).is_null());
  CHECK(extval::json_number(std::numeric_limits<double>::infinity()).is_null());
  CHECK(extval::json_number(1.0397207708399179).get<double>() == 1.03972077084);
  CHECK(extval::json_number(2.0).get<double>() == 2.0);
  CHECK(extval::json_number(0.0).get<double>() == 0.0);
}

TEST_CASE("summary JSON carries version, echo, and null for unset fields") {
  ExperimentConfig config;
  config.source = extval::TailModel::pareto(1.0);
  config.n = 50;
  config.k_rule = extval::KRule::fixed(7);
  config.replications = 1;
  config.master_seed = 4;
  const extval::ExperimentResult result = extval::run_experiment_serial(config);
  const ordered_json j = extval::summary_to_json(result, config);
  CHECK(j["version"] == extval::kSemanticVersion);
  CHECK(j["config"]["n"] == 50);
  CHECK_FALSE(j["config"].contains("workers"));
  const ordered_json& s = j["summary"];
  CHECK(s["usable_replications"] == 1);
  CHECK(s["replication_failures"] == 0);
  CHECK(s["empirical_sd_of_standardized"].is_null());  // one replication
  CHECK(s["k_used"] == 7);
  CHECK(s.contains("ks_p_value"));
  CHECK_FALSE(s.contains("x_p_mc"));

  // Identical experiments serialize to identical bytes.
  const extval::ExperimentResult again = extval::run_experiment_serial(config);
  CHECK(extval::summary_to_json(again, config).dump() == j.dump());
}

TEST_CASE("sweep JSON carries per-cell summaries and failures") {
  ExperimentConfig base;
  base.source = extval::TailModel::pareto(1.0);
  base.n = 200;
  base.replications = 10;
  base.master_seed = 2;
  extval::SweepSpec spec;
  spec.axis = extval::SweepAxis::K;
  spec.values = {8.0, 2.5};
  const extval::SweepResult result = extval::sweep(base, spec.axis, spec.values);
  const ordered_json j = extval::sweep_to_json(result, base, spec);
  CHECK(j["version"] == extval::kSemanticVersion);
  CHECK(j["sweep"]["axis"] == "k");
  REQUIRE(j["cells"].size() == 2);
  CHECK(j["cells"][0]["failed"] == false);
  CHECK(j["cells"][0]["summary"].contains("mean_gamma_hat"));
  CHECK(j["cells"][1]["failed"] == true);
  CHECK(j["cells"][1].contains("error"));
  CHECK_FALSE(j["cells"][1].contains("summary"));
}
