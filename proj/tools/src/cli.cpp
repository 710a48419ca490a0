#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fmgls/error.hpp"
#include "fmgls_cli/commands.hpp"

namespace fmgls::cli {

const std::vector<std::pair<std::string, std::string>>& schemas() {
  static const std::vector<std::pair<std::string, std::string>> s{
#include "fmgls_cli_schemas.inc"
  };
  return s;
}

namespace {

namespace fs = std::filesystem;

// Everything is rendered before the first file is opened, so a failure
// leaves no partial output behind.
void write_outputs(const std::string& dir, const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(dir);
  for (const auto& [name, body] : files) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + path.string() + "'");
    f << body;
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

struct Common {
  std::string config, data, out, method, lr;
  std::vector<std::string> restrict;
  bool json = false;
};

RunConfig run_config(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig{} : parse_run_config(load_config(c.config));
  if (!c.method.empty()) cfg.methods = {parse_method(c.method)};
  if (c.lr == "kernel") cfg.pipeline.lr = LrPath::kernel;
  if (c.lr == "biam") cfg.pipeline.lr = LrPath::biam;
  for (const auto& r : c.restrict) cfg.restrictions.push_back(parse_restriction(r));
  if (!c.out.empty()) cfg.out = c.out;
  return cfg;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"FM-GLS estimation and cointegration tests for seemingly unrelated polynomial regressions", "fmgls"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  Common est_opt, test_opt, wald_opt;
  auto add_common = [](CLI::App* s, Common& c) {
    s->add_option("--config", c.config, "config file or preset name");
    s->add_option("--data", c.data, "wide CSV dataset")->required();
    s->add_option("--out", c.out, "output directory");
    s->add_option("--lr", c.lr, "long-run covariance for FM-SOLS/FM-SUR")->check(CLI::IsMember({"kernel", "biam"}));
    s->add_flag("--json", c.json, "print JSON instead of a table");
  };

  auto* est = app.add_subcommand("estimate", "FM-SOLS, FM-SUR and FM-GLS estimates with 95% intervals");
  add_common(est, est_opt);
  est->add_option("--method", est_opt.method, "single method")->check(CLI::IsMember({"ols", "sols", "sur", "fgls"}));

  auto* tst = app.add_subcommand("test", "subsampling KPSS cointegration tests");
  add_common(tst, test_opt);

  auto* wld = app.add_subcommand("wald", "Wald test of coefficient restrictions");
  add_common(wld, wald_opt);
  wld->add_option("--method", wald_opt.method, "estimator")->check(CLI::IsMember({"sols", "sur", "fgls"}));
  wld->add_option("--restrict", wald_opt.restrict, "NAME:K=VALUE, K is the 1-based coefficient index");

  std::string sim_config, sim_out;
  std::uint64_t sim_seed = 0;
  int sim_threads = 1, sim_reps = 0;
  bool sim_quiet = false;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo experiment");
  sim->add_option("--config", sim_config, "experiment config or preset name")->required();
  sim->add_option("--out", sim_out, "output directory");
  auto* seed_opt = sim->add_option("--seed", sim_seed, "root seed (overrides the config)");
  sim->add_option("--threads", sim_threads, "worker threads")->check(CLI::PositiveNumber);
  sim->add_option("--reps", sim_reps, "replications per cell (overrides the config)")->check(CLI::PositiveNumber);
  sim->add_flag("--quiet", sim_quiet, "no progress on standard error");

  std::string schema_name, schema_out;
  auto* sch = app.add_subcommand("export-schema", "write the JSON Schemas of the outputs");
  sch->add_option("name", schema_name, "schema file name (all when omitted)");
  sch->add_option("--out", schema_out, "output directory");

  std::string xd_data, xd_out;
  auto* xd = app.add_subcommand("export-data", "re-emit a dataset in canonical CSV form");
  xd->add_option("--data", xd_data, "wide CSV dataset")->required();
  xd->add_option("--out", xd_out, "output file (standard output when omitted)");

  DgpConfig gen;
  double gen_rho = 0.0;
  std::string gen_setting = "A", gen_out;
  auto* gn = app.add_subcommand("generate", "write one simulated panel as a dataset");
  gn->add_option("--setting", gen_setting, "A, B, C_size, C_power1, C_power2, C_power3");
  gn->add_option("--n", gen.n, "equations");
  gn->add_option("--T", gen.T, "sample size");
  auto* rho_opt = gn->add_option("--rho", gen_rho, "Setting A: rho1 = ... = rho4");
  gn->add_option("--lambda-low", gen.lambda_low, "Settings B/C");
  gn->add_option("--lambda-high", gen.lambda_high, "Settings B/C");
  gn->add_option("--theta", gen.theta, "Settings B/C");
  gn->add_option("--J", gen.J, "Setting C power designs");
  gn->add_option("--seed", gen.seed, "seed");
  gn->add_option("--out", gen_out, "output file (standard output when omitted)");

  std::string preset_name;
  auto* pre = app.add_subcommand("preset", "list presets or print one as JSON");
  pre->add_option("name", preset_name, "preset name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    if (est->parsed()) {
      const RunConfig cfg = run_config(est_opt);
      const Dataset ds = read_dataset(est_opt.data);
      const EstimateRun run = run_estimate(cfg, ds);
      const Json j = estimate_json(run);
      if (!cfg.out.empty()) {
        std::vector<std::pair<std::string, std::string>> files{{"estimates.json", dump(j)}};
        for (std::size_t k = 0; k < run.results.size(); ++k)
          files.emplace_back("residuals_" + method_key(run.results[k].method) + ".csv", residuals_csv(run, k));
        write_outputs(cfg.out, files);
      }
      out << (est_opt.json ? dump(j) : estimate_table(run));
    } else if (tst->parsed()) {
      const RunConfig cfg = run_config(test_opt);
      const Dataset ds = read_dataset(test_opt.data);
      const TestRun run = run_tests(cfg, ds);
      const Json j = test_json(run);
      if (!cfg.out.empty()) write_outputs(cfg.out, {{"tests.json", dump(j)}});
      out << (test_opt.json ? dump(j) : test_table(run));
    } else if (wld->parsed()) {
      RunConfig cfg = run_config(wald_opt);
      if (wald_opt.method.empty() && cfg.methods.size() != 1) cfg.methods = {Method::fgls_fm};
      const Dataset ds = read_dataset(wald_opt.data);
      const WaldRun run = run_wald(cfg, ds);
      const Json j = wald_json(run);
      if (!cfg.out.empty()) write_outputs(cfg.out, {{"wald.json", dump(j)}});
      if (wald_opt.json) {
        out << dump(j);
      } else {
        char line[160];
        std::snprintf(line, sizeof line, "Wald-%s: W = %.3f, dof = %d, p = %.3f, %s at %.3g\n",
                      method_key(run.method).c_str(), run.result.statistic, run.result.dof, run.result.p_value,
                      run.result.p_value < run.alpha ? "reject" : "accept", run.alpha);
        out << line;
      }
    } else if (sim->parsed()) {
      ExperimentConfig cfg = parse_experiment_config(load_config(sim_config));
      if (*seed_opt) cfg.seed = sim_seed;
      if (sim_reps > 0)
        for (auto& c : cfg.cells) c.reps = sim_reps;
      if (!sim_out.empty()) cfg.out = sim_out;
      const SimulateRun run = run_simulate(cfg, sim_threads, !sim_quiet, &err);
      const std::string csv = simulate_csv(run);
      const Json j = simulate_json(run);
      if (!cfg.out.empty())
        write_outputs(cfg.out, {{"report.csv", csv}, {"report.json", dump(j)}});
      else
        out << csv;
      if (run.aborted()) {
        err << "error: at least one cell aborted (estimator failure rate above 1%)\n";
        return kNumerical;
      }
    } else if (sch->parsed()) {
      bool found = false;
      std::vector<std::pair<std::string, std::string>> files;
      for (const auto& [name, body] : schemas())
        if (schema_name.empty() || name == schema_name || name == schema_name + ".schema.json") {
          files.emplace_back(name, body);
          found = true;
        }
      if (!found) throw ValidationError("unknown schema '" + schema_name + "'");
      if (!schema_out.empty())
        write_outputs(schema_out, files);
      else if (files.size() == 1)
        out << files.front().second;
      else
        for (const auto& f : files) out << f.first << "\n";
    } else if (xd->parsed()) {
      const Dataset ds = read_dataset(xd_data);
      std::ostringstream os;
      write_dataset(os, ds);
      if (xd_out.empty()) {
        out << os.str();
      } else {
        std::ofstream f(xd_out, std::ios::binary);
        if (!f) throw ValidationError("cannot write '" + xd_out + "'");
        f << os.str();
      }
    } else if (gn->parsed()) {
      gen.setting = parse_setting(gen_setting);
      if (*rho_opt) gen.set_rho(gen_rho);
      gen.validate();
      const SimulatedPanel sim_panel = generate(gen);
      Dataset ds;
      for (int i = 0; i < gen.n; ++i) ds.names.push_back("u" + std::to_string(i + 1));
      for (int t = 1; t <= gen.T; ++t) ds.t.push_back(t);
      ds.data = sim_panel.data;
      std::ostringstream os;
      write_dataset(os, ds);
      if (gen_out.empty()) {
        out << os.str();
      } else {
        std::ofstream f(gen_out, std::ios::binary);
        if (!f) throw ValidationError("cannot write '" + gen_out + "'");
        f << os.str();
      }
    } else if (pre->parsed()) {
      if (preset_name.empty())
        for (const auto& p : preset_names()) out << p << "\n";
      else
        out << dump(preset(preset_name));
    }
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "numerical error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}

}  // namespace fmgls::cli
