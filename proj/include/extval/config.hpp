#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "extval/mc_harness.hpp"
#include "extval/path_gen.hpp"

namespace extval {

using ordered_json = nlohmann::ordered_json;

/// Input for the simulate subcommand: product paths written as CSV.
struct SimulateConfig {
  ProductSpec product;
  std::size_t m = 0;
  std::size_t n = 0;
  std::uint64_t master_seed = 1;
};

/// Axis description for the sweep subcommand.
struct SweepSpec {
  SweepAxis axis = SweepAxis::M;
  std::vector<double> values;
};

/// Strict parsers: every object is checked against its allowed key set and
/// any unknown key raises ConfigError naming the key and its location.
ExperimentConfig parse_experiment_config(const ordered_json& node);
SimulateConfig parse_simulate_config(const ordered_json& node);
SweepSpec parse_sweep_spec(const ordered_json& node);
TailModel parse_tail_model(const ordered_json& node, const std::string& path);

/// Whole-file parsers; each rejects sections its subcommand does not use.
ExperimentConfig experiment_from_root(const ordered_json& root);
std::pair<ExperimentConfig, SweepSpec> sweep_from_root(const ordered_json& root);
SimulateConfig simulate_from_root(const ordered_json& root);

/// Reads and parses a JSON config file; parse failures carry the path.
ordered_json load_config_file(const std::string& path);

/// Canonical echo of the effective configuration: every field explicit,
/// defaults resolved. Embedded in all outputs.
ordered_json experiment_config_to_json(const ExperimentConfig& config);
ordered_json simulate_config_to_json(const SimulateConfig& config);

/// Summary JSON: semantic version, config echo, then the summary fields at
/// 12 significant digits (NaN becomes null). Contains nothing
/// run-dependent beyond the statistics, so identical experiments serialize
/// to identical bytes.
ordered_json summary_to_json(const ExperimentResult& result,
                             const ExperimentConfig& config);

ordered_json sweep_to_json(const SweepResult& result,
                           const ExperimentConfig& base,
                           const SweepSpec& spec);

/// 12-significant-digit JSON value; non-finite maps to null.
ordered_json json_number(double x);

inline constexpr const char* kSemanticVersion = "0.1.0";

}  // namespace extval
