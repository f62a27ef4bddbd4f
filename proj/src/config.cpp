#include "extval/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "extval/numfmt.hpp"

namespace extval {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError("config " + path + ": " + message);
}

void check_object(const ordered_json& node, const std::string& path,
                  std::initializer_list<const char*> allowed) {
  if (!node.is_object()) fail(path, "expected an object");
  for (auto it = node.begin(); it != node.end(); ++it) {
    bool known = false;
    for (const char* key : allowed) {
      if (it.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      std::string keys;
      for (const char* key : allowed) {
        if (!keys.empty()) keys += ", ";
        keys += key;
      }
      fail(path, "unknown key '" + it.key() + "' (allowed: " + keys + ")");
    }
  }
}

const ordered_json* find(const ordered_json& node, const char* key) {
  const auto it = node.find(key);
  return it == node.end() ? nullptr : &*it;
}

const ordered_json& require(const ordered_json& node, const char* key,
                            const std::string& path) {
  const ordered_json* value = find(node, key);
  if (value == nullptr) fail(path, "missing required key '" + std::string(key) + "'");
  return *value;
}

double as_number(const ordered_json& value, const std::string& path) {
  if (!value.is_number()) fail(path, "expected a number");
  return value.get<double>();
}

std::string as_string(const ordered_json& value, const std::string& path) {
  if (!value.is_string()) fail(path, "expected a string");
  return value.get<std::string>();
}

bool as_bool(const ordered_json& value, const std::string& path) {
  if (!value.is_boolean()) fail(path, "expected a boolean");
  return value.get<bool>();
}

std::size_t as_count(const ordered_json& value, const std::string& path) {
  if (!value.is_number_integer() && !value.is_number_unsigned()) {
    fail(path, "expected a non-negative integer");
  }
  if (value.is_number_integer() && value.get<long long>() < 0) {
    fail(path, "expected a non-negative integer");
  }
  return value.get<std::size_t>();
}

std::uint64_t as_seed(const ordered_json& value, const std::string& path) {
  if (!value.is_number_unsigned() &&
      !(value.is_number_integer() && value.get<long long>() >= 0)) {
    fail(path, "expected a non-negative integer seed");
  }
  return value.get<std::uint64_t>();
}

double number_or(const ordered_json& node, const char* key,
                 const std::string& path, double fallback) {
  const ordered_json* value = find(node, key);
  return value == nullptr ? fallback : as_number(*value, path + "." + key);
}

void check_close(double given, double derived, const std::string& path,
                 const char* what) {
  const double tol = 1e-9 * std::max(1.0, std::abs(derived));
  if (std::abs(given - derived) > tol) {
    fail(path, std::string(what) + " " + format_sig12(given) +
                   " is inconsistent with the derived value " +
                   format_sig12(derived));
  }
}

ProcessSpec parse_driver(const ordered_json& node, const std::string& path);
MultiplierSpec parse_multiplier(const ordered_json& node,
                                const std::string& path);
ProductSpec parse_product(const ordered_json& node, const std::string& path);

ProcessSpec parse_driver(const ordered_json& node, const std::string& path) {
  if (!node.is_object()) fail(path, "expected an object");
  const std::string kind = as_string(require(node, "kind", path), path + ".kind");
  ProcessSpec spec;
  if (kind == "bm" || kind == "brownian_motion") {
    check_object(node, path, {"kind", "holder_exponent"});
    spec = ProcessSpec::brownian();
  } else if (kind == "fbm" || kind == "fractional_brownian_motion") {
    check_object(node, path, {"kind", "hurst", "method", "holder_exponent"});
    const double hurst = as_number(require(node, "hurst", path), path + ".hurst");
    FbmMethod method = FbmMethod::CirculantEmbedding;
    if (const ordered_json* value = find(node, "method")) {
      const std::string name = as_string(*value, path + ".method");
      if (name == "circulant") {
        method = FbmMethod::CirculantEmbedding;
      } else if (name == "cholesky") {
        method = FbmMethod::DenseCholesky;
      } else {
        fail(path + ".method", "expected 'circulant' or 'cholesky'");
      }
    }
    spec = ProcessSpec::fractional_brownian(hurst, method);
  } else if (kind == "ramp") {
    check_object(node, path, {"kind", "holder_exponent"});
    spec = ProcessSpec::ramp();
  } else if (kind == "constant") {
    check_object(node, path, {"kind", "level", "holder_exponent"});
    spec = ProcessSpec::constant(
        as_number(require(node, "level", path), path + ".level"));
  } else {
    fail(path + ".kind", "unknown process kind '" + kind +
                             "' (expected bm, fbm, ramp, or constant)");
  }
  if (const ordered_json* value = find(node, "holder_exponent")) {
    const double eta = as_number(*value, path + ".holder_exponent");
    if (!(eta > 0.0 && eta <= 1.0)) {
      fail(path + ".holder_exponent", "must lie in (0,1]");
    }
    spec.holder_exponent = eta;
  }
  return spec;
}

MultiplierSpec parse_multiplier(const ordered_json& node,
                                const std::string& path) {
  if (!node.is_object()) fail(path, "expected an object");
  if (find(node, "fixed") != nullptr) {
    check_object(node, path, {"fixed"});
    const double fixed = as_number(node.at("fixed"), path + ".fixed");
    if (!(fixed > 0.0)) fail(path + ".fixed", "must be positive");
    return fixed;
  }
  return parse_tail_model(node, path);
}

ProductSpec parse_product(const ordered_json& node, const std::string& path) {
  check_object(node, path, {"multiplier", "driver"});
  ProductSpec spec{
      parse_multiplier(require(node, "multiplier", path), path + ".multiplier"),
      parse_driver(require(node, "driver", path), path + ".driver")};
  return spec;
}

}  // namespace

TailModel parse_tail_model(const ordered_json& node, const std::string& path) {
  if (!node.is_object()) fail(path, "expected an object");
  const std::string family =
      as_string(require(node, "family", path), path + ".family");
  const double scale = number_or(node, "scale", path, 1.0);
  if (family == "pareto") {
    check_object(node, path, {"family", "gamma", "scale"});
    return TailModel::pareto(
        as_number(require(node, "gamma", path), path + ".gamma"), scale);
  }
  if (family == "frechet") {
    check_object(node, path, {"family", "gamma", "rho", "scale"});
    TailModel model = TailModel::frechet(
        as_number(require(node, "gamma", path), path + ".gamma"), scale);
    if (const ordered_json* value = find(node, "rho")) {
      check_close(as_number(*value, path + ".rho"), *model.rho(), path, "rho");
    }
    return model;
  }
  if (family == "burr") {
    check_object(node, path, {"family", "tau", "lambda_shape", "gamma", "rho", "scale"});
    TailModel model = TailModel::burr(
        as_number(require(node, "tau", path), path + ".tau"),
        as_number(require(node, "lambda_shape", path), path + ".lambda_shape"),
        scale);
    if (const ordered_json* value = find(node, "gamma")) {
      check_close(as_number(*value, path + ".gamma"), model.gamma(), path, "gamma");
    }
    if (const ordered_json* value = find(node, "rho")) {
      check_close(as_number(*value, path + ".rho"), *model.rho(), path, "rho");
    }
    return model;
  }
  fail(path + ".family", "unknown family '" + family +
                             "' (expected pareto, frechet, or burr)");
}

ExperimentConfig parse_experiment_config(const ordered_json& node) {
  const std::string path = "experiment";
  check_object(node, path,
               {"model", "product", "norm_order", "n", "m", "m_oracle",
                "k_rule", "tail_prob_rule", "replications", "master_seed",
                "true_gamma", "true_rho", "lambda_limit", "ci_level",
                "negligibility_threshold", "workers", "mc_quantile_reference",
                "mc_quantile_draws", "mc_quantile_pool"});
  ExperimentConfig config;

  const ordered_json* model = find(node, "model");
  const ordered_json* product = find(node, "product");
  if ((model == nullptr) == (product == nullptr)) {
    fail(path, "exactly one of 'model' (direct mode) and 'product' (paths mode) is required");
  }
  if (model != nullptr) {
    config.source = parse_tail_model(*model, path + ".model");
  } else {
    config.source = parse_product(*product, path + ".product");
  }

  if (const ordered_json* value = find(node, "norm_order")) {
    const std::string sub = path + ".norm_order";
    if (value->is_string()) {
      config.norm_order = NormOrder::parse(as_string(*value, sub));
    } else {
      config.norm_order = NormOrder::finite(as_number(*value, sub));
    }
  }

  config.n = as_count(require(node, "n", path), path + ".n");
  if (const ordered_json* value = find(node, "m")) {
    config.m = as_count(*value, path + ".m");
  }
  if (const ordered_json* value = find(node, "m_oracle")) {
    config.m_oracle = as_count(*value, path + ".m_oracle");
  }

  if (const ordered_json* value = find(node, "k_rule")) {
    const std::string sub = path + ".k_rule";
    check_object(*value, sub, {"type", "k", "lambda"});
    const std::string type = as_string(require(*value, "type", sub), sub + ".type");
    if (type == "fixed") {
      config.k_rule = KRule::fixed(as_count(require(*value, "k", sub), sub + ".k"));
    } else if (type == "power") {
      config.k_rule =
          KRule::power(as_number(require(*value, "lambda", sub), sub + ".lambda"));
    } else {
      fail(sub + ".type", "expected 'fixed' or 'power'");
    }
  }

  if (const ordered_json* value = find(node, "tail_prob_rule")) {
    const std::string sub = path + ".tail_prob_rule";
    check_object(*value, sub, {"type", "value", "c"});
    const std::string type = as_string(require(*value, "type", sub), sub + ".type");
    if (type == "fixed") {
      config.tail_prob_rule =
          TailProbRule::fixed(as_number(require(*value, "value", sub), sub + ".value"));
    } else if (type == "one_over_n") {
      config.tail_prob_rule = TailProbRule::one_over_n();
    } else if (type == "c_over_n") {
      config.tail_prob_rule =
          TailProbRule::c_over_n(as_number(require(*value, "c", sub), sub + ".c"));
    } else {
      fail(sub + ".type", "expected 'fixed', 'one_over_n', or 'c_over_n'");
    }
  }

  if (const ordered_json* value = find(node, "replications")) {
    config.replications = as_count(*value, path + ".replications");
  }
  if (const ordered_json* value = find(node, "master_seed")) {
    config.master_seed = as_seed(*value, path + ".master_seed");
  }
  config.true_gamma =
      as_number(require(node, "true_gamma", path), path + ".true_gamma");
  if (const ordered_json* value = find(node, "true_rho")) {
    const std::string sub = path + ".true_rho";
    if (value->is_string()) {
      if (as_string(*value, sub) != "unknown") {
        fail(sub, "expected a number or the string 'unknown'");
      }
    } else {
      config.true_rho = as_number(*value, sub);
    }
  }
  if (const ordered_json* value = find(node, "lambda_limit")) {
    const std::string sub = path + ".lambda_limit";
    if (value->is_string()) {
      if (as_string(*value, sub) != "auto") {
        fail(sub, "expected a number or the string 'auto'");
      }
    } else {
      config.lambda_limit = as_number(*value, sub);
    }
  }
  config.ci_level = number_or(node, "ci_level", path, config.ci_level);
  config.negligibility_threshold = number_or(
      node, "negligibility_threshold", path, config.negligibility_threshold);
  if (const ordered_json* value = find(node, "workers")) {
    config.workers = static_cast<int>(as_count(*value, path + ".workers"));
  }
  if (const ordered_json* value = find(node, "mc_quantile_reference")) {
    config.mc_quantile_reference =
        as_bool(*value, path + ".mc_quantile_reference");
  }
  if (const ordered_json* value = find(node, "mc_quantile_draws")) {
    config.mc_quantile_draws = as_count(*value, path + ".mc_quantile_draws");
  }
  if (const ordered_json* value = find(node, "mc_quantile_pool")) {
    config.mc_quantile_pool = as_count(*value, path + ".mc_quantile_pool");
  }
  return config;
}

SimulateConfig parse_simulate_config(const ordered_json& node) {
  const std::string path = "simulate";
  check_object(node, path, {"product", "m", "n", "master_seed"});
  SimulateConfig config;
  config.product = parse_product(require(node, "product", path), path + ".product");
  config.m = as_count(require(node, "m", path), path + ".m");
  config.n = as_count(require(node, "n", path), path + ".n");
  if (const ordered_json* value = find(node, "master_seed")) {
    config.master_seed = as_seed(*value, path + ".master_seed");
  }
  return config;
}

SweepSpec parse_sweep_spec(const ordered_json& node) {
  const std::string path = "sweep";
  check_object(node, path, {"axis", "values"});
  SweepSpec spec;
  const std::string axis = as_string(require(node, "axis", path), path + ".axis");
  if (axis == "m") {
    spec.axis = SweepAxis::M;
  } else if (axis == "k") {
    spec.axis = SweepAxis::K;
  } else if (axis == "n") {
    spec.axis = SweepAxis::N;
  } else {
    fail(path + ".axis", "expected 'm', 'k', or 'n'");
  }
  const ordered_json& values = require(node, "values", path);
  if (!values.is_array() || values.empty()) {
    fail(path + ".values", "expected a non-empty array of numbers");
  }
  for (const ordered_json& value : values) {
    spec.values.push_back(as_number(value, path + ".values[]"));
  }
  return spec;
}

ordered_json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

ordered_json json_number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round_sig12(x);
}

namespace {

ordered_json tail_model_to_json(const TailModel& model) {
  ordered_json j;
  switch (model.family()) {
    case TailFamily::Pareto:
      j["family"] = "pareto";
      j["gamma"] = json_number(model.gamma());
      break;
    case TailFamily::Frechet:
      j["family"] = "frechet";
      j["gamma"] = json_number(model.gamma());
      j["rho"] = json_number(*model.rho());
      break;
    case TailFamily::Burr:
      j["family"] = "burr";
      j["tau"] = json_number(model.tau());
      j["lambda_shape"] = json_number(model.lambda_shape());
      j["gamma"] = json_number(model.gamma());
      j["rho"] = json_number(*model.rho());
      break;
  }
  j["scale"] = json_number(model.scale());
  return j;
}

ordered_json driver_to_json(const ProcessSpec& spec) {
  ordered_json j;
  switch (spec.kind) {
    case ProcessKind::BrownianMotion:
      j["kind"] = "bm";
      break;
    case ProcessKind::FractionalBrownianMotion:
      j["kind"] = "fbm";
      j["hurst"] = json_number(spec.hurst);
      j["method"] = spec.method == FbmMethod::CirculantEmbedding ? "circulant"
                                                                 : "cholesky";
      break;
    case ProcessKind::DeterministicRamp:
      j["kind"] = "ramp";
      break;
    case ProcessKind::DeterministicConstant:
      j["kind"] = "constant";
      j["level"] = json_number(spec.constant_level);
      break;
  }
  j["holder_exponent"] = json_number(spec.holder_exponent);
  return j;
}

ordered_json multiplier_to_json(const MultiplierSpec& spec) {
  if (const TailModel* model = std::get_if<TailModel>(&spec)) {
    return tail_model_to_json(*model);
  }
  ordered_json j;
  j["fixed"] = json_number(std::get<double>(spec));
  return j;
}

ordered_json product_to_json(const ProductSpec& spec) {
  ordered_json j;
  j["multiplier"] = multiplier_to_json(spec.multiplier);
  j["driver"] = driver_to_json(spec.driver);
  return j;
}

ordered_json norm_order_to_json(const NormOrder& order) {
  if (order.is_sup()) return "inf";
  return json_number(order.p());
}

ordered_json k_rule_to_json(const KRule& rule) {
  ordered_json j;
  if (rule.kind == KRule::Kind::Fixed) {
    j["type"] = "fixed";
    j["k"] = rule.fixed_k;
  } else {
    j["type"] = "power";
    j["lambda"] = json_number(rule.lambda_exp);
  }
  return j;
}

ordered_json tail_prob_rule_to_json(const TailProbRule& rule) {
  ordered_json j;
  switch (rule.kind) {
    case TailProbRule::Kind::Fixed:
      j["type"] = "fixed";
      j["value"] = json_number(rule.value);
      break;
    case TailProbRule::Kind::OneOverN:
      j["type"] = "one_over_n";
      break;
    case TailProbRule::Kind::COverN:
      j["type"] = "c_over_n";
      j["c"] = json_number(rule.value);
      break;
  }
  return j;
}

}  // namespace

ordered_json experiment_config_to_json(const ExperimentConfig& config) {
  ordered_json j;
  if (const TailModel* model = config.direct_model()) {
    j["model"] = tail_model_to_json(*model);
  } else {
    j["product"] = product_to_json(*config.product());
    j["norm_order"] = norm_order_to_json(config.norm_order);
  }
  j["n"] = config.n;
  if (!config.direct_mode()) {
    j["m"] = config.m;
    j["m_oracle"] = config.m_oracle;
  }
  j["k_rule"] = k_rule_to_json(config.k_rule);
  j["tail_prob_rule"] = tail_prob_rule_to_json(config.tail_prob_rule);
  j["replications"] = config.replications;
  j["master_seed"] = config.master_seed;
  j["true_gamma"] = json_number(config.true_gamma);
  j["true_rho"] = config.true_rho ? json_number(*config.true_rho)
                                  : ordered_json("unknown");
  j["lambda_limit"] = config.lambda_limit ? json_number(*config.lambda_limit)
                                          : ordered_json("auto");
  j["ci_level"] = json_number(config.ci_level);
  j["negligibility_threshold"] = json_number(config.negligibility_threshold);
  if (!config.direct_mode()) {
    j["mc_quantile_reference"] = config.mc_quantile_reference;
    if (config.mc_quantile_reference) {
      j["mc_quantile_draws"] = config.mc_quantile_draws;
      j["mc_quantile_pool"] = config.mc_quantile_pool;
    }
  }
  return j;
}

ordered_json simulate_config_to_json(const SimulateConfig& config) {
  ordered_json j;
  j["product"] = product_to_json(config.product);
  j["m"] = config.m;
  j["n"] = config.n;
  j["master_seed"] = config.master_seed;
  return j;
}

ordered_json summary_to_json(const ExperimentResult& result,
                             const ExperimentConfig& config) {
  const ExperimentSummary& s = result.summary;
  ordered_json j;
  j["version"] = kSemanticVersion;
  j["config"] = experiment_config_to_json(config);
  ordered_json out;
  out["mean_bias"] = json_number(s.mean_bias);
  out["rmse"] = json_number(s.rmse);
  out["empirical_sd_of_standardized"] = json_number(s.empirical_sd_of_standardized);
  out["ks_statistic"] = json_number(s.ks_statistic);
  out["ks_p_value"] = json_number(s.ks_p_value);
  out["ci_coverage"] = json_number(s.ci_coverage);
  out["c_n_median"] = json_number(s.c_n_median);
  out["c_n_p90"] = json_number(s.c_n_p90);
  out["replication_failures"] = s.replication_failures;
  out["usable_replications"] = s.usable_replications;
  out["mean_gamma_hat"] = json_number(s.mean_gamma_hat);
  out["mean_gamma_hat_oracle"] = json_number(s.mean_gamma_hat_oracle);
  out["max_abs_err_median"] = json_number(s.max_abs_err_median);
  out["ks_quantile_statistic"] = json_number(s.ks_quantile_statistic);
  out["ks_quantile_p_value"] = json_number(s.ks_quantile_p_value);
  out["median_rel_quantile_err"] = json_number(s.median_rel_quantile_err);
  out["sd_std_quant_err"] = json_number(s.sd_std_quant_err);
  out["k_used"] = s.k_used;
  out["tail_prob_used"] = json_number(s.tail_prob_used);
  out["d_n"] = json_number(s.d_n);
  out["lambda_limit_used"] = json_number(s.lambda_limit_used);
  if (config.mc_quantile_reference && !config.direct_mode()) {
    out["x_p_mc"] = json_number(s.x_p_mc);
    out["x_p_mc_band_lo"] = json_number(s.x_p_mc_band_lo);
    out["x_p_mc_band_hi"] = json_number(s.x_p_mc_band_hi);
    out["median_rel_err_vs_mc"] = json_number(s.median_rel_err_vs_mc);
  }
  j["summary"] = out;
  return j;
}

ordered_json sweep_to_json(const SweepResult& result,
                           const ExperimentConfig& base,
                           const SweepSpec& spec) {
  ordered_json j;
  j["version"] = kSemanticVersion;
  j["config"] = experiment_config_to_json(base);
  ordered_json sweep_block;
  sweep_block["axis"] = sweep_axis_name(spec.axis);
  sweep_block["values"] = ordered_json::array();
  for (const double value : spec.values) {
    sweep_block["values"].push_back(json_number(value));
  }
  j["sweep"] = sweep_block;
  j["cells"] = ordered_json::array();
  for (const SweepCell& cell : result.cells) {
    ordered_json c;
    c["value"] = json_number(cell.axis_value);
    c["failed"] = cell.failed;
    if (cell.failed) {
      c["error"] = cell.error;
    } else {
      ordered_json cell_json = summary_to_json(cell.result, base);
      c["summary"] = cell_json["summary"];
    }
    j["cells"].push_back(std::move(c));
  }
  return j;
}

ExperimentConfig experiment_from_root(const ordered_json& root) {
  check_object(root, "(top level)", {"experiment"});
  if (!root.contains("experiment")) {
    fail("(top level)", "missing required section 'experiment'");
  }
  return parse_experiment_config(root.at("experiment"));
}

std::pair<ExperimentConfig, SweepSpec> sweep_from_root(const ordered_json& root) {
  check_object(root, "(top level)", {"experiment", "sweep"});
  if (!root.contains("experiment")) {
    fail("(top level)", "missing required section 'experiment'");
  }
  if (!root.contains("sweep")) {
    fail("(top level)", "missing required section 'sweep'");
  }
  return {parse_experiment_config(root.at("experiment")),
          parse_sweep_spec(root.at("sweep"))};
}

SimulateConfig simulate_from_root(const ordered_json& root) {
  check_object(root, "(top level)", {"simulate"});
  if (!root.contains("simulate")) {
    fail("(top level)", "missing required section 'simulate'");
  }
  return parse_simulate_config(root.at("simulate"));
}

}  // namespace extval
