// Command line front end. Subcommands cover the full pipeline: simulate
// writes path matrices, estimate runs Hill/Weissman on a sample, experiment
// and sweep drive the Monte Carlo harness, check-rates evaluates the
// refinement/sample-size tradeoff. Exit codes: 0 success, 2 bad input or
// config, 3 experiment-level failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "extval/config.hpp"
#include "extval/evt.hpp"
#include "extval/functionals.hpp"
#include "extval/mc_harness.hpp"
#include "extval/numfmt.hpp"
#include "extval/path_gen.hpp"
#include "extval/rng.hpp"

namespace {

using extval::ordered_json;

struct CommonOpts {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int workers = 0;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* workers_opt = nullptr;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config) {
  if (needs_config) {
    cmd->add_option("--config", opts.config_path, "JSON config file")
        ->required();
  }
  cmd->add_option("--out", opts.out_path,
                  "output file (stdout when omitted)");
  opts.seed_opt =
      cmd->add_option("--seed", opts.seed, "override the config master seed");
  opts.workers_opt =
      cmd->add_option("--workers", opts.workers,
                      "worker threads, 0 = all cores (flag beats env beats "
                      "config)")
          ->envname("EXTVAL_WORKERS")
          ->check(CLI::NonNegativeNumber);
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << content;
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path);
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    write_text(out_path, content);
  }
}

std::string json_text(const ordered_json& j) { return j.dump(2) + "\n"; }

// Companion CSV sits next to the JSON artifact named by --out.
std::string table_path_for(const std::string& out_path) {
  const std::string suffix = ".json";
  if (out_path.size() > suffix.size() &&
      out_path.compare(out_path.size() - suffix.size(), suffix.size(),
                       suffix) == 0) {
    return out_path.substr(0, out_path.size() - suffix.size()) + ".csv";
  }
  return out_path + ".csv";
}

void apply_overrides(extval::ExperimentConfig& config, const CommonOpts& opts) {
  if (opts.seed_opt->count() > 0) config.master_seed = opts.seed;
  if (opts.workers_opt->count() > 0) config.workers = opts.workers;
}

void print_lint(const extval::ExperimentConfig& config) {
  for (const std::string& warning : config.lint_warnings()) {
    std::cerr << "warning: " << warning << "\n";
  }
}

std::vector<double> read_values_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open values file: " + path);
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const char* begin = line.c_str() + start;
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin) {
      throw std::runtime_error(path + " line " + std::to_string(line_no) +
                               ": expected a number");
    }
    while (*end == ' ' || *end == '\t' || *end == ',') ++end;
    if (*end != '\0') {
      throw std::runtime_error(path + " line " + std::to_string(line_no) +
                               ": expected one value per line");
    }
    values.push_back(value);
  }
  if (values.size() < 2) {
    throw std::runtime_error(path + ": need at least 2 values");
  }
  return values;
}

int run_simulate(const CommonOpts& opts) {
  extval::SimulateConfig config =
      extval::simulate_from_root(extval::load_config_file(opts.config_path));
  if (opts.seed_opt->count() > 0) config.master_seed = opts.seed;
  const extval::PathMatrix paths = extval::simulate_product(
      config.product, config.m, config.n,
      extval::RandomStream(config.master_seed));
  std::ostringstream out;
  paths.write_csv(out, "extval " + std::string(extval::kSemanticVersion) +
                           " config " +
                           extval::simulate_config_to_json(config).dump());
  emit(opts.out_path, out.str());
  return 0;
}

struct EstimateOpts {
  std::string values_path;
  std::string paths_path;
  std::string norm_order = "inf";
  std::size_t k = 0;
  double tail_prob = 0.0;
  double ci_level = 0.95;
};

int run_estimate(const CommonOpts& common, const EstimateOpts& opts) {
  if (opts.values_path.empty() == opts.paths_path.empty()) {
    throw std::invalid_argument(
        "estimate needs exactly one of --values or --paths");
  }
  std::vector<double> values;
  ordered_json input;
  if (!opts.values_path.empty()) {
    values = read_values_csv(opts.values_path);
    input["values"] = opts.values_path;
  } else {
    std::ifstream in(opts.paths_path);
    if (!in) {
      throw std::runtime_error("cannot open paths file: " + opts.paths_path);
    }
    const extval::PathMatrix paths = extval::PathMatrix::read_csv(in);
    const extval::NormOrder order = extval::NormOrder::parse(opts.norm_order);
    values = extval::batch_norms(paths, order);
    input["paths"] = opts.paths_path;
    input["norm_order"] = order.to_string();
  }
  input["n"] = values.size();
  input["k"] = opts.k;
  input["tail_prob"] = extval::json_number(opts.tail_prob);
  input["ci_level"] = extval::json_number(opts.ci_level);

  const extval::OrderedSample sample = extval::order_statistics(values);
  const extval::HillEstimate gamma_hat = extval::hill(sample, opts.k);
  const extval::Interval ci =
      extval::hill_confidence_interval(gamma_hat, opts.ci_level);
  const extval::QuantileEstimate x_hat = extval::weissman_quantile(
      sample, opts.k, opts.tail_prob, gamma_hat.gamma_hat);

  ordered_json j;
  j["version"] = extval::kSemanticVersion;
  j["input"] = input;
  j["gamma_hat"] = extval::json_number(gamma_hat.gamma_hat);
  j["ci"] = {{"lo", extval::json_number(ci.lo)},
             {"hi", extval::json_number(ci.hi)},
             {"level", extval::json_number(opts.ci_level)}};
  j["threshold"] = extval::json_number(gamma_hat.threshold);
  j["x_hat"] = extval::json_number(x_hat.x_hat);
  j["d_n"] = extval::json_number(x_hat.d_n);
  emit(common.out_path, json_text(j));
  return 0;
}

int run_experiment_cmd(const CommonOpts& opts) {
  extval::ExperimentConfig config =
      extval::experiment_from_root(extval::load_config_file(opts.config_path));
  apply_overrides(config, opts);
  config.validate();
  print_lint(config);
  const extval::ExperimentResult result = extval::run_experiment(config);
  emit(opts.out_path, json_text(extval::summary_to_json(result, config)));
  if (!opts.out_path.empty()) {
    std::ostringstream table;
    extval::write_replication_csv(
        table, result,
        "extval " + std::string(extval::kSemanticVersion) + " config " +
            extval::experiment_config_to_json(config).dump());
    write_text(table_path_for(opts.out_path), table.str());
  }
  return 0;
}

std::string sweep_table_csv(const extval::SweepResult& result,
                            extval::SweepAxis axis) {
  std::ostringstream out;
  out << "axis,value,failed,usable_replications,mean_bias,rmse,"
         "empirical_sd_of_standardized,ks_p_value,ci_coverage,c_n_median,"
         "c_n_p90,max_abs_err_median,replication_failures\n";
  const std::string name = extval::sweep_axis_name(axis);
  for (const extval::SweepCell& cell : result.cells) {
    out << name << ',' << extval::format_sig17(cell.axis_value) << ','
        << (cell.failed ? 1 : 0) << ',';
    if (cell.failed) {
      out << "0,nan,nan,nan,nan,nan,nan,nan,nan,nan\n";
      continue;
    }
    const extval::ExperimentSummary& s = cell.result.summary;
    out << s.usable_replications << ',' << extval::format_sig17(s.mean_bias)
        << ',' << extval::format_sig17(s.rmse) << ','
        << extval::format_sig17(s.empirical_sd_of_standardized) << ','
        << extval::format_sig17(s.ks_p_value) << ','
        << extval::format_sig17(s.ci_coverage) << ','
        << extval::format_sig17(s.c_n_median) << ','
        << extval::format_sig17(s.c_n_p90) << ','
        << extval::format_sig17(s.max_abs_err_median) << ','
        << s.replication_failures << '\n';
  }
  return out.str();
}

int run_sweep_cmd(const CommonOpts& opts) {
  auto [config, spec] =
      extval::sweep_from_root(extval::load_config_file(opts.config_path));
  apply_overrides(config, opts);
  print_lint(config);
  const extval::SweepResult result = extval::sweep(config, spec.axis,
                                                   spec.values);
  emit(opts.out_path, json_text(extval::sweep_to_json(result, config, spec)));
  if (!opts.out_path.empty()) {
    write_text(table_path_for(opts.out_path),
               sweep_table_csv(result, spec.axis));
  }
  bool any_ok = false;
  for (const extval::SweepCell& cell : result.cells) {
    if (!cell.failed) any_ok = true;
  }
  if (!any_ok) {
    std::cerr << "experiment failure: every sweep cell failed\n";
    return 3;
  }
  return 0;
}

struct CheckRatesOpts {
  std::size_t n = 0;
  double lambda = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  double eps_prime = 0.05;
  std::size_t m = 0;
  double threshold = 0.1;
};

int run_check_rates(const CommonOpts& common, const CheckRatesOpts& opts) {
  const double required_m = extval::tradeoff_required_m(
      opts.n, opts.lambda, opts.gamma, opts.eta, opts.eps_prime);
  const std::size_t k =
      extval::KRule::power(opts.lambda).resolve(opts.n);
  const extval::RateBound bound = extval::error_rate_bound(
      opts.eta, opts.m, opts.n, k, opts.gamma, opts.gamma, opts.threshold);

  ordered_json j;
  j["version"] = extval::kSemanticVersion;
  j["input"] = {{"n", opts.n},
                {"lambda", extval::json_number(opts.lambda)},
                {"gamma", extval::json_number(opts.gamma)},
                {"eta", extval::json_number(opts.eta)},
                {"eps_prime", extval::json_number(opts.eps_prime)},
                {"m", opts.m},
                {"negligibility_threshold",
                 extval::json_number(opts.threshold)}};
  j["required_m"] = extval::json_number(required_m);
  j["satisfied"] = static_cast<double>(opts.m) >= required_m;
  j["k_used"] = k;
  j["bound_value"] = extval::json_number(bound.bound);
  j["sqrt_k_times_bound"] = extval::json_number(bound.sqrt_k_times_bound);
  j["negligible"] = bound.negligible;
  emit(common.out_path, json_text(j));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "extval: tail index and extreme quantile estimation for norm "
      "functionals of discretized processes"};
  app.require_subcommand(1);

  CommonOpts sim_opts;
  CLI::App* sim_cmd =
      app.add_subcommand("simulate", "generate a path matrix CSV");
  add_common(sim_cmd, sim_opts, true);

  CommonOpts est_opts;
  EstimateOpts est;
  CLI::App* est_cmd = app.add_subcommand(
      "estimate", "Hill and Weissman estimates for a sample");
  add_common(est_cmd, est_opts, false);
  est_cmd->add_option("--values", est.values_path,
                      "CSV of raw sample values, one per line");
  est_cmd->add_option("--paths", est.paths_path,
                      "path matrix CSV produced by simulate");
  est_cmd->add_option("--norm-order", est.norm_order,
                      "norm order for --paths: p >= 1 or inf");
  est_cmd->add_option("--k", est.k, "number of top order statistics")
      ->required();
  est_cmd->add_option("--tail-prob", est.tail_prob,
                      "exceedance probability for the quantile estimate")
      ->required();
  est_cmd->add_option("--ci-level", est.ci_level,
                      "confidence level for the Hill interval");

  CommonOpts exp_opts;
  CLI::App* exp_cmd = app.add_subcommand(
      "experiment", "Monte Carlo experiment from a JSON config");
  add_common(exp_cmd, exp_opts, true);

  CommonOpts sweep_opts;
  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "repeat an experiment along one axis (m, k, or n)");
  add_common(sweep_cmd, sweep_opts, true);

  CommonOpts rates_opts;
  CheckRatesOpts rates;
  CLI::App* rates_cmd = app.add_subcommand(
      "check-rates", "refinement level needed for negligible grid error");
  add_common(rates_cmd, rates_opts, false);
  rates_cmd->add_option("--n", rates.n, "sample size")->required();
  rates_cmd->add_option("--lambda", rates.lambda,
                        "k growth exponent, k = floor(n^lambda)")
      ->required();
  rates_cmd->add_option("--gamma", rates.gamma, "tail index")->required();
  rates_cmd->add_option("--eta", rates.eta, "usable Holder exponent")
      ->required();
  rates_cmd->add_option("--eps-prime", rates.eps_prime,
                        "Holder slack absorbed into the rate");
  rates_cmd->add_option("--m", rates.m, "grid resolution to check")
      ->required();
  rates_cmd->add_option("--threshold", rates.threshold,
                        "negligibility threshold for sqrt(k) * bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(sim_cmd)) return run_simulate(sim_opts);
    if (app.got_subcommand(est_cmd)) return run_estimate(est_opts, est);
    if (app.got_subcommand(exp_cmd)) return run_experiment_cmd(exp_opts);
    if (app.got_subcommand(sweep_cmd)) return run_sweep_cmd(sweep_opts);
    if (app.got_subcommand(rates_cmd)) return run_check_rates(rates_opts, rates);
  } catch (const extval::ExperimentFailure& e) {
    std::cerr << "experiment failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
