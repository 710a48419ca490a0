#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "fmgls/estimators.hpp"
#include "fmgls/experiment.hpp"
#include "fmgls/inference.hpp"
#include "fmgls_cli/dataset.hpp"

namespace fmgls::cli {

using Json = nlohmann::json;

struct UnitSpec {
  std::string name;
  EquationOrder order;
};

struct Restriction {
  std::string equation;
  int coefficient = 1;  // 1-based within the equation
  double value = 0.0;
};

// Settings for estimate, test and wald.
struct RunConfig {
  std::vector<UnitSpec> units;  // empty: every unit in the data with the default orders
  EquationOrder default_order{1, 2};
  std::vector<Method> methods{Method::sols_fm, Method::sur_fm, Method::fgls_fm};
  PipelineOptions pipeline;
  double alpha = 0.05;
  std::optional<int> block_size;
  std::vector<KpssVariant> variants{KpssVariant::sols, KpssVariant::sur, KpssVariant::biam};
  std::vector<Restriction> restrictions;
  std::uint64_t seed = 0;
  std::string out;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::vector<ExperimentCell> cells;
  std::string out;
};

Method parse_method(const std::string& s);
std::string method_key(Method m);
KpssVariant parse_variant(const std::string& s);

RunConfig parse_run_config(const Json& j);
ExperimentConfig parse_experiment_config(const Json& j);

// A preset name or a path to a JSON file.
Json load_config(const std::string& name_or_path);
const std::vector<std::string>& preset_names();
bool is_preset(const std::string& name);
const Json& preset(const std::string& name);

// The units selected by the config, in config order (or data order).
std::vector<UnitSpec> resolve_units(const RunConfig& cfg, const Dataset& ds);
// Restricts the dataset to the given units and returns the matching spec.
std::pair<CprSpec, Dataset> select_units(const std::vector<UnitSpec>& units, const Dataset& ds);

}  // namespace fmgls::cli
