#include "fmgls/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "fmgls/error.hpp"
#include "fmgls/estimators.hpp"
#include "fmgls/inference.hpp"

namespace fmgls {

std::string task_name(Task t) {
  switch (t) {
    case Task::mse: return "mse";
    case Task::wald_size: return "wald_size";
    case Task::wald_power: return "wald_power";
    case Task::coint_size: return "coint_size";
    case Task::coint_power: return "coint_power";
  }
  return "unknown";
}

Task parse_task(const std::string& s) {
  for (Task t : {Task::mse, Task::wald_size, Task::wald_power, Task::coint_size, Task::coint_power})
    if (task_name(t) == s) return t;
  throw ValidationError("unknown task '" + s + "'");
}

std::vector<std::string> metric_names(Task t, bool infeasible) {
  switch (t) {
    case Task::mse: {
      std::vector<std::string> m{"mse_fgls", "ratio_sols", "ratio_sur", "mse_sols", "mse_sur"};
      if (infeasible) m.insert(m.end(), {"ratio_infsols", "ratio_infsur", "ratio_infgls"});
      return m;
    }
    case Task::wald_size:
    case Task::wald_power:
      return {"single_sols", "single_sur", "single_fgls", "joint_sols", "joint_sur", "joint_fgls"};
    case Task::coint_size:
    case Task::coint_power: return {"rej_sols", "rej_sur", "rej_biam"};
  }
  return {};
}

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// The three feasible estimators with shared first stage. A failed estimator
// is left empty so the others still contribute.
struct ThreeFits {
  std::optional<EstimationResult> sols, sur, gls;
};

template <class F>
auto attempt(F&& f) -> std::optional<decltype(f())> {
  try {
    return f();
  } catch (const NumericalError&) {
  } catch (const ValidationError&) {
  }
  return std::nullopt;
}

ThreeFits fit_three(const CprSpec& spec, const PanelData& data) {
  const Matrix xi = first_stage_xi(spec, data);
  ThreeFits f;
  if (auto lr = attempt([&] { return kernel_lr(xi); })) {
    if (auto w = attempt([&] { return fm_weights(*lr); })) {
      f.sols = attempt([&] { return fm_sols(spec, data, *lr, *w); });
      f.sur = attempt([&] { return fm_sur(spec, data, *lr, *w); });
    }
  }
  f.gls = attempt([&] {
    const Matrix u = xi.topRows(data.n());
    const int q = select_banding(u);
    const BiamDecomposition filter(fit_var_ladder(u, q), data.T());
    return fm_gls(spec, data, filter, biam_lrcov(xi, q));
  });
  return f;
}

double indicator(const std::optional<bool>& b) { return b ? (*b ? 1.0 : 0.0) : kMissing; }

// One value per task column; NaN marks an estimator that failed on this draw.
std::vector<double> replicate(const ExperimentCell& cell, const std::optional<PopulationQuantities>& pop, Rng& rng) {
  const SimulatedPanel sim = generate(cell.dgp, rng);
  const CprSpec spec = simulation_spec(cell.dgp.n);
  const ThreeFits f = fit_three(spec, sim.data);
  const int n = cell.dgp.n;
  const std::optional<EstimationResult>* fits[3] = {&f.sols, &f.sur, &f.gls};
  std::vector<double> out;
  switch (cell.task) {
    case Task::mse: {
      const double truth = sim.beta(3);
      for (const auto* e : fits) out.push_back(*e ? std::pow((*e)->beta(3) - truth, 2) : kMissing);
      if (cell.infeasible) {
        const FmWeights w = fm_weights(pop->lr);
        for (Method m : {Method::sols_inf, Method::sur_inf, Method::gls_inf}) {
          auto e = attempt([&] { return estimate_with_given_covariances(spec, sim.data, m, pop->lr, w, pop->ladder); });
          out.push_back(e ? std::pow(e->beta(3) - truth, 2) : kMissing);
        }
      }
      break;
    }
    case Task::wald_size:
    case Task::wald_power: {
      const int d = spec.params();
      const double value = -0.3 + (cell.task == Task::wald_power ? cell.wald_shift : 0.0);
      std::vector<int> joint;
      for (int i = 0; i < n; ++i) joint.push_back(spec.offset(i) + 3);
      const Matrix r1 = selection_matrix(d, {3});
      const Matrix rj = selection_matrix(d, joint);
      for (const auto* e : fits)
        out.push_back(indicator(*e ? attempt([&] { return wald(**e, r1, Vector::Constant(1, value)).p_value < cell.alpha; })
                                   : std::nullopt));
      for (const auto* e : fits)
        out.push_back(indicator(*e ? attempt([&] { return wald(**e, rj, Vector::Constant(n, value)).p_value < cell.alpha; })
                                   : std::nullopt));
      break;
    }
    case Task::coint_size:
    case Task::coint_power: {
      const KpssVariant variants[3] = {KpssVariant::sols, KpssVariant::sur, KpssVariant::biam};
      for (int k = 0; k < 3; ++k)
        out.push_back(indicator(*fits[k] ? attempt([&] { return cointegration_test(**fits[k], variants[k], cell.alpha).reject; })
                                         : std::nullopt));
      break;
    }
  }
  return out;
}

// Rows where every listed column is present.
std::vector<std::vector<double>> complete(const std::vector<std::vector<double>>& rows, std::initializer_list<std::size_t> cols) {
  std::vector<std::vector<double>> out;
  for (const auto& r : rows) {
    bool ok = true;
    for (std::size_t k : cols) ok = ok && !std::isnan(r[k]);
    if (ok) out.push_back(r);
  }
  return out;
}

double mean(const std::vector<std::vector<double>>& rows, std::size_t k) {
  double s = 0.0;
  for (const auto& r : rows) s += r[k];
  return s / static_cast<double>(rows.size());
}

Metric mean_metric(const std::string& name, const std::vector<std::vector<double>>& all, std::size_t k) {
  const auto rows = complete(all, {k});
  Metric out{name, kMissing, kMissing, static_cast<int>(all.size() - rows.size())};
  if (rows.empty()) return out;
  const double m = mean(rows, k);
  double ss = 0.0;
  for (const auto& r : rows) ss += (r[k] - m) * (r[k] - m);
  const double R = static_cast<double>(rows.size());
  out.value = m;
  out.se = R > 1 ? std::sqrt(ss / (R - 1) / R) : kMissing;
  return out;
}

Metric rate_metric(const std::string& name, const std::vector<std::vector<double>>& all, std::size_t k) {
  const auto rows = complete(all, {k});
  Metric out{name, kMissing, kMissing, static_cast<int>(all.size() - rows.size())};
  if (rows.empty()) return out;
  const double p = mean(rows, k);
  out.value = p;
  out.se = std::sqrt(p * (1 - p) / static_cast<double>(rows.size()));
  return out;
}

// mean(a)/mean(b) over draws where both exist, delta-method standard error.
Metric ratio_metric(const std::string& name, const std::vector<std::vector<double>>& all, std::size_t a,
                    std::size_t b) {
  const auto rows = complete(all, {a, b});
  Metric out{name, kMissing, kMissing, static_cast<int>(all.size() - rows.size())};
  if (rows.empty()) return out;
  const double ma = mean(rows, a), mb = mean(rows, b);
  const double R = static_cast<double>(rows.size());
  double vaa = 0, vbb = 0, vab = 0;
  for (const auto& r : rows) {
    vaa += (r[a] - ma) * (r[a] - ma);
    vbb += (r[b] - mb) * (r[b] - mb);
    vab += (r[a] - ma) * (r[b] - mb);
  }
  out.value = ma / mb;
  if (R > 1) {
    vaa /= (R - 1), vbb /= (R - 1), vab /= (R - 1);
    const double var = (vaa - 2 * out.value * vab + out.value * out.value * vbb) / (mb * mb) / R;
    out.se = std::sqrt(std::max(0.0, var));
  }
  return out;
}

std::vector<Metric> summarize(const ExperimentCell& cell, const std::vector<std::vector<double>>& rows) {
  const auto names = metric_names(cell.task, cell.infeasible);
  std::vector<Metric> m;
  if (cell.task == Task::mse) {
    m.push_back(mean_metric(names[0], rows, 2));
    m.push_back(ratio_metric(names[1], rows, 0, 2));
    m.push_back(ratio_metric(names[2], rows, 1, 2));
    m.push_back(mean_metric(names[3], rows, 0));
    m.push_back(mean_metric(names[4], rows, 1));
    if (cell.infeasible)
      for (std::size_t k = 0; k < 3; ++k) m.push_back(ratio_metric(names[5 + k], rows, 3 + k, 2));
  } else {
    for (std::size_t k = 0; k < names.size(); ++k) m.push_back(rate_metric(names[k], rows, k));
  }
  return m;
}

bool null_design(Task t) { return t == Task::mse || t == Task::wald_size || t == Task::coint_size; }

}  // namespace

CellReport run_experiment(const ExperimentCell& cell, int threads, std::uint64_t seed, std::uint64_t cell_index,
                          const std::function<void(int, int)>& progress) {
  require(cell.reps >= 1, "reps must be positive");
  require(cell.alpha > 0.0 && cell.alpha < 1.0, "alpha must lie in (0,1)");
  cell.dgp.validate();
  require(!cell.infeasible || (cell.task == Task::mse && cell.dgp.setting == Setting::A),
          "infeasible estimators are available for the Setting A mse task only");
  const auto start = std::chrono::steady_clock::now();
  std::optional<PopulationQuantities> pop;
  if (cell.infeasible) pop = setting_a_population(cell.dgp);

  const int reps = cell.reps;
  std::vector<std::optional<std::vector<double>>> results(reps);
  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (int r = next++; r < reps; r = next++) {
      Rng rng(derive_seed(seed, {cell_index, static_cast<std::uint64_t>(r)}));
      results[r] = attempt([&] { return replicate(cell, pop, rng); });
      const int d = ++done;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(d, reps);
      }
    }
  };
  const int nthreads = std::max(1, std::min(threads, reps));
  std::vector<std::thread> pool;
  for (int k = 1; k < nthreads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  CellReport rep;
  rep.cell = cell;
  rep.reps = reps;
  std::vector<std::vector<double>> rows;
  for (auto& r : results) {
    if (r) {
      bool any = false;
      for (double v : *r) any = any || std::isnan(v);
      rep.failures += any ? 1 : 0;
      rows.push_back(std::move(*r));
    } else {
      ++rep.failures;
    }
  }
  if (rows.empty()) {
    rep.aborted = true;
    for (const auto& name : metric_names(cell.task, cell.infeasible)) rep.metrics.push_back({name, kMissing, kMissing, reps});
  } else {
    rep.metrics = summarize(cell, rows);
    const int whole = reps - static_cast<int>(rows.size());
    for (auto& m : rep.metrics) {
      m.failures += whole;
      if (null_design(cell.task) && m.failures > 0.01 * reps) rep.aborted = true;
    }
    if (rep.aborted)
      for (auto& m : rep.metrics) m.value = m.se = kMissing;
  }
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rep;
}

}  // namespace fmgls
