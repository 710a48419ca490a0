#include "fmgls_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <mutex>
#include <sstream>

#include "fmgls/error.hpp"

namespace fmgls::cli {

namespace {

std::string fixed3(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string term_label(const EquationOrder& o, int k) {
  if (k == 0) return "1";
  if (k <= o.trend_order) return k == 1 ? "t" : "t^" + std::to_string(k);
  const int p = k - o.trend_order;
  return p == 1 ? "x" : "x^" + std::to_string(p);
}

Json lr_json(const EstimationResult& r) {
  Json j = Json::object();
  if (!r.lr) return j;
  switch (r.lr->source) {
    case LrSource::kernel:
      j["source"] = "kernel";
      j["bandwidth"] = r.lr->bandwidth;
      break;
    case LrSource::biam:
      j["source"] = "biam";
      j["q"] = r.lr->q;
      j["r"] = r.lr->r;
      break;
    case LrSource::supplied: j["source"] = "supplied"; break;
  }
  return j;
}

std::string lr_text(const EstimationResult& r) {
  if (!r.lr) return "";
  if (r.lr->source == LrSource::kernel) return "  [Bartlett kernel, bandwidth " + fixed3(r.lr->bandwidth) + "]";
  if (r.lr->source == LrSource::biam)
    return "  [BIAM, q = " + std::to_string(r.lr->q) + ", r = " + std::to_string(r.lr->r) + "]";
  return "";
}

std::vector<double> standard_errors(const EstimationResult& r) {
  const auto d = r.beta.size();
  std::vector<double> se(d, std::nan(""));
  if (r.sandwich.meat.size() == 0) return se;
  const Matrix phi = r.phi();
  for (Eigen::Index j = 0; j < d; ++j) se[j] = std::sqrt(std::max(0.0, phi(j, j)));
  return se;
}

std::optional<double> quadratic_turning_point(const CprSpec& spec, const Vector& beta, int i) {
  if (spec[i].power_order != 2) return std::nullopt;
  const int base = spec.offset(i) + spec[i].trend_order + 1;
  if (beta(base + 1) == 0.0) return std::nullopt;
  return turning_point(beta(base), beta(base + 1));
}

constexpr double kZ95 = 1.959963984540054;

}  // namespace

EstimateRun run_estimate(const RunConfig& cfg, const Dataset& ds) {
  EstimateRun run;
  run.units = resolve_units(cfg, ds);
  auto [spec, sub] = select_units(run.units, ds);
  run.spec = spec;
  run.data = sub;
  for (Method m : cfg.methods) run.results.push_back(estimate(run.spec, run.data.data, m, cfg.pipeline));
  return run;
}

Json estimate_json(const EstimateRun& run) {
  Json j;
  j["command"] = "estimate";
  j["n"] = run.data.data.n();
  j["T"] = run.data.data.T();
  j["units"] = run.data.names;
  j["results"] = Json::array();
  for (const auto& r : run.results) {
    Json m;
    m["method"] = method_key(r.method);
    m["long_run"] = lr_json(r);
    m["equations"] = Json::array();
    const auto se = standard_errors(r);
    for (int i = 0; i < run.spec.equations(); ++i) {
      Json e;
      e["name"] = run.units[i].name;
      e["trend_order"] = run.spec[i].trend_order;
      e["power_order"] = run.spec[i].power_order;
      e["coefficients"] = Json::array();
      for (int k = 0; k < run.spec.width(i); ++k) {
        const int g = run.spec.offset(i) + k;
        Json c;
        c["index"] = k + 1;
        c["term"] = term_label(run.spec[i], k);
        c["estimate"] = r.beta(g);
        c["se"] = se[g];
        c["lower"] = r.beta(g) - kZ95 * se[g];
        c["upper"] = r.beta(g) + kZ95 * se[g];
        e["coefficients"].push_back(c);
      }
      const auto tp = quadratic_turning_point(run.spec, r.beta, i);
      e["turning_point"] = tp ? Json(*tp) : Json(nullptr);
      m["equations"].push_back(e);
    }
    j["results"].push_back(m);
  }
  return j;
}

std::string estimate_table(const EstimateRun& run) {
  std::ostringstream os;
  char line[256];
  for (const auto& r : run.results) {
    os << method_name(r.method) << lr_text(r) << "\n";
    std::snprintf(line, sizeof line, "  %-12s %-6s %12s %12s %28s\n", "unit", "term", "estimate", "se",
                  "95% interval");
    os << line;
    const auto se = standard_errors(r);
    for (int i = 0; i < run.spec.equations(); ++i) {
      for (int k = 0; k < run.spec.width(i); ++k) {
        const int g = run.spec.offset(i) + k;
        const std::string ci = "(" + fixed3(r.beta(g) - kZ95 * se[g]) + ", " + fixed3(r.beta(g) + kZ95 * se[g]) + ")";
        std::snprintf(line, sizeof line, "  %-12s %-6s %12s %12s %28s\n", run.units[i].name.c_str(),
                      term_label(run.spec[i], k).c_str(), fixed3(r.beta(g)).c_str(), fixed3(se[g]).c_str(),
                      ci.c_str());
        os << line;
      }
      if (const auto tp = quadratic_turning_point(run.spec, r.beta, i)) {
        std::snprintf(line, sizeof line, "  %-12s %-6s %12s\n", run.units[i].name.c_str(), "turn", fixed3(*tp).c_str());
        os << line;
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string residuals_csv(const EstimateRun& run, std::size_t k) {
  const Matrix& u = run.results.at(k).residuals;
  std::ostringstream os;
  os << "t";
  for (const auto& name : run.data.names) os << ',' << csv_escape("u_" + name);
  os << "\r\n";
  for (Eigen::Index t = 0; t < u.cols(); ++t) {
    os << run.data.t[t];
    for (Eigen::Index i = 0; i < u.rows(); ++i) os << ',' << format_number(u(i, t));
    os << "\r\n";
  }
  return os.str();
}

TestRun run_tests(const RunConfig& cfg, const Dataset& ds) {
  TestRun run;
  run.units = resolve_units(cfg, ds);
  run.alpha = cfg.alpha;
  const auto [spec, sub] = select_units(run.units, ds);
  run.T = sub.data.T();
  for (KpssVariant v : cfg.variants) {
    const Method m = v == KpssVariant::sols ? Method::sols_fm : v == KpssVariant::sur ? Method::sur_fm : Method::fgls_fm;
    const EstimationResult est = estimate(spec, sub.data, m, cfg.pipeline);
    run.results.push_back(cointegration_test(est, v, cfg.alpha, cfg.block_size));
  }
  return run;
}

Json test_json(const TestRun& run) {
  Json j;
  j["command"] = "test";
  j["alpha"] = run.alpha;
  j["n"] = static_cast<int>(run.units.size());
  j["T"] = run.T;
  j["units"] = Json::array();
  for (const auto& u : run.units) j["units"].push_back(u.name);
  j["results"] = Json::array();
  for (const auto& r : run.results) {
    Json x;
    x["variant"] = variant_name(r.variant);
    x["k_max"] = r.k_max;
    x["statistics"] = r.statistics;
    x["block_size"] = r.block_size;
    x["num_blocks"] = r.num_blocks;
    x["critical_value"] = r.critical_value;
    x["rejection_rule"] = r.rejection_rule;
    x["reject"] = r.reject;
    x["q_warning"] = r.q_warning;
    x["block_candidates"] = r.selection.candidates;
    x["candidate_statistics"] = r.selection.stat;
    j["results"].push_back(x);
  }
  return j;
}

std::string test_table(const TestRun& run) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %10s %10s %6s %6s %10s %10s\n", "test", "K_max", "rule", "b", "M",
                "crit", "decision");
  os << line;
  for (const auto& r : run.results) {
    std::snprintf(line, sizeof line, "%-8s %10s %10s %6d %6d %10s %10s\n", ("K^" + variant_name(r.variant)).c_str(),
                  fixed3(r.k_max).c_str(), fixed3(r.rejection_rule).c_str(), r.block_size, r.num_blocks,
                  fixed3(r.critical_value).c_str(), r.reject ? "reject" : "accept");
    os << line;
    if (r.q_warning) os << "  warning: banding parameter exceeds half the block length\n";
  }
  std::snprintf(line, sizeof line, "level %.3g, Bonferroni over M blocks\n", run.alpha);
  os << line;
  return os.str();
}

Restriction parse_restriction(const std::string& s) {
  const auto colon = s.rfind(':');
  const auto eq = s.find('=', colon == std::string::npos ? 0 : colon);
  if (colon == std::string::npos || eq == std::string::npos || colon == 0)
    throw ValidationError("restriction '" + s + "': expected NAME:K=VALUE");
  Restriction r;
  r.equation = s.substr(0, colon);
  try {
    std::size_t used = 0;
    const std::string k = s.substr(colon + 1, eq - colon - 1);
    r.coefficient = std::stoi(k, &used);
    if (used != k.size()) throw std::invalid_argument(k);
    const std::string v = s.substr(eq + 1);
    r.value = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
  } catch (const std::logic_error&) {
    throw ValidationError("restriction '" + s + "': expected NAME:K=VALUE");
  }
  if (r.coefficient < 1) throw ValidationError("restriction '" + s + "': K is 1-based");
  return r;
}

WaldRun run_wald(const RunConfig& cfg, const Dataset& ds) {
  if (cfg.restrictions.empty()) throw ValidationError("wald: no restrictions given");
  if (cfg.methods.size() != 1) throw ValidationError("wald: choose exactly one method");
  WaldRun run;
  run.method = cfg.methods.front();
  if (run.method == Method::ols) throw ValidationError("wald: OLS carries no Wald covariance");
  run.restrictions = cfg.restrictions;
  run.alpha = cfg.alpha;
  const auto units = resolve_units(cfg, ds);
  const auto [spec, sub] = select_units(units, ds);
  std::vector<int> idx;
  Vector r(static_cast<Eigen::Index>(cfg.restrictions.size()));
  for (std::size_t k = 0; k < cfg.restrictions.size(); ++k) {
    const auto& x = cfg.restrictions[k];
    int i = -1;
    for (std::size_t u = 0; u < units.size(); ++u)
      if (units[u].name == x.equation) i = static_cast<int>(u);
    if (i < 0) throw ValidationError("restriction on unknown equation '" + x.equation + "'");
    if (x.coefficient > spec.width(i))
      throw ValidationError("equation '" + x.equation + "' has only " + std::to_string(spec.width(i)) +
                            " coefficients");
    idx.push_back(spec.offset(i) + x.coefficient - 1);
    r(static_cast<Eigen::Index>(k)) = x.value;
  }
  const EstimationResult est = estimate(spec, sub.data, run.method, cfg.pipeline);
  run.result = wald(est, selection_matrix(spec.params(), idx), r);
  return run;
}

Json wald_json(const WaldRun& run) {
  Json j;
  j["command"] = "wald";
  j["method"] = method_key(run.method);
  j["restrictions"] = Json::array();
  for (const auto& r : run.restrictions)
    j["restrictions"].push_back({{"equation", r.equation}, {"coefficient", r.coefficient}, {"value", r.value}});
  j["statistic"] = run.result.statistic;
  j["dof"] = run.result.dof;
  j["p_value"] = run.result.p_value;
  j["alpha"] = run.alpha;
  j["reject"] = run.result.p_value < run.alpha;
  return j;
}

bool SimulateRun::aborted() const {
  for (const auto& c : cells)
    if (c.aborted) return true;
  return false;
}

SimulateRun run_simulate(const ExperimentConfig& cfg, int threads, bool progress, std::ostream* err) {
  SimulateRun run;
  run.config = cfg;
  std::mutex io;
  const std::size_t total = cfg.cells.size();
  for (std::size_t c = 0; c < total; ++c) {
    const ExperimentCell& cell = cfg.cells[c];
    std::function<void(int, int)> cb;
    if (progress && err) {
      *err << "[" << (c + 1) << "/" << total << "] " << setting_name(cell.dgp.setting) << " "
           << task_name(cell.task) << " n=" << cell.dgp.n << " T=" << cell.dgp.T << " reps=" << cell.reps << "\n";
      const int step = std::max(1, cell.reps / 10);
      cb = [&io, err, step](int done, int all) {
        if (done % step != 0 && done != all) return;
        std::lock_guard<std::mutex> lock(io);
        *err << "  " << done << "/" << all << "\n";
      };
    }
    run.cells.push_back(run_experiment(cell, threads, cfg.seed, c, cb));
  }
  return run;
}

namespace {

std::vector<std::string> metric_columns(const SimulateRun& run) {
  std::vector<std::string> cols;
  for (const auto& c : run.cells)
    for (const auto& m : c.metrics)
      if (std::find(cols.begin(), cols.end(), m.name) == cols.end()) cols.push_back(m.name);
  return cols;
}

std::string csv_number(double v) { return std::isfinite(v) ? format_number(v) : ""; }

}  // namespace

std::string simulate_csv(const SimulateRun& run) {
  const auto cols = metric_columns(run);
  std::ostringstream os;
  os << "cell,setting,task,n,T,rho1,rho2,rho3,rho4,lambda_low,lambda_high,theta,J,presample,alpha,wald_shift,"
        "reps,failures,aborted";
  for (const auto& c : cols) os << ',' << c << ',' << c << "_se," << c << "_failures";
  os << "\r\n";
  for (std::size_t k = 0; k < run.cells.size(); ++k) {
    const CellReport& r = run.cells[k];
    const DgpConfig& d = r.cell.dgp;
    os << k << ',' << setting_name(d.setting) << ',' << task_name(r.cell.task) << ',' << d.n << ',' << d.T << ','
       << format_number(d.rho1) << ',' << format_number(d.rho2) << ',' << format_number(d.rho3) << ','
       << format_number(d.rho4) << ',' << format_number(d.lambda_low) << ',' << format_number(d.lambda_high) << ','
       << format_number(d.theta) << ',' << d.J << ',' << d.presample << ',' << format_number(r.cell.alpha) << ','
       << format_number(r.cell.wald_shift) << ',' << r.reps << ',' << r.failures << ','
       << (r.aborted ? "true" : "false");
    for (const auto& name : cols) {
      const Metric* m = nullptr;
      for (const auto& x : r.metrics)
        if (x.name == name) m = &x;
      if (m)
        os << ',' << csv_number(m->value) << ',' << csv_number(m->se) << ',' << m->failures;
      else
        os << ",,,";
    }
    os << "\r\n";
  }
  return os.str();
}

Json simulate_json(const SimulateRun& run) {
  Json j;
  j["command"] = "simulate";
  j["name"] = run.config.name;
  j["seed"] = run.config.seed;
  j["cells"] = Json::array();
  for (std::size_t k = 0; k < run.cells.size(); ++k) {
    const CellReport& r = run.cells[k];
    const DgpConfig& d = r.cell.dgp;
    Json c;
    c["index"] = k;
    c["setting"] = setting_name(d.setting);
    c["task"] = task_name(r.cell.task);
    c["n"] = d.n;
    c["T"] = d.T;
    c["rho"] = {d.rho1, d.rho2, d.rho3, d.rho4};
    c["lambda"] = {d.lambda_low, d.lambda_high};
    c["theta"] = d.theta;
    c["J"] = d.J;
    c["presample"] = d.presample;
    c["alpha"] = r.cell.alpha;
    c["wald_shift"] = r.cell.wald_shift;
    c["infeasible"] = r.cell.infeasible;
    c["reps"] = r.reps;
    c["failures"] = r.failures;
    c["aborted"] = r.aborted;
    c["seconds"] = r.seconds;
    c["metrics"] = Json::array();
    for (const auto& m : r.metrics)
      c["metrics"].push_back({{"name", m.name}, {"value", m.value}, {"se", m.se}, {"failures", m.failures}});
    j["cells"].push_back(c);
  }
  return j;
}

}  // namespace fmgls::cli
