#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "fmgls_cli/config.hpp"

namespace fmgls::cli {

enum ExitCode { kOk = 0, kValidation = 2, kNumerical = 3 };

struct EstimateRun {
  std::vector<UnitSpec> units;
  CprSpec spec{std::vector<EquationOrder>{{}}};
  Dataset data;
  std::vector<EstimationResult> results;
};

EstimateRun run_estimate(const RunConfig& cfg, const Dataset& ds);
Json estimate_json(const EstimateRun& run);
std::string estimate_table(const EstimateRun& run);
// t followed by one residual column per unit.
std::string residuals_csv(const EstimateRun& run, std::size_t k);

struct TestRun {
  std::vector<UnitSpec> units;
  double alpha = 0.05;
  int T = 0;
  std::vector<KpssResult> results;
};
TestRun run_tests(const RunConfig& cfg, const Dataset& ds);
Json test_json(const TestRun& run);
std::string test_table(const TestRun& run);

struct WaldRun {
  Method method = Method::fgls_fm;
  std::vector<Restriction> restrictions;
  double alpha = 0.05;
  WaldResult result;
};
WaldRun run_wald(const RunConfig& cfg, const Dataset& ds);
Json wald_json(const WaldRun& run);

// Parses "NAME:K=VALUE".
Restriction parse_restriction(const std::string& s);

struct SimulateRun {
  ExperimentConfig config;
  std::vector<CellReport> cells;
  bool aborted() const;
};
SimulateRun run_simulate(const ExperimentConfig& cfg, int threads, bool progress, std::ostream* err);
// One row per cell; contains no timings so equal inputs give equal bytes.
std::string simulate_csv(const SimulateRun& run);
Json simulate_json(const SimulateRun& run);

// Published JSON Schemas keyed by file name.
const std::vector<std::pair<std::string, std::string>>& schemas();

// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fmgls::cli
