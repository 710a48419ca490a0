#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "fmgls/dgp.hpp"

namespace fmgls {

enum class Task { mse, wald_size, wald_power, coint_size, coint_power };
std::string task_name(Task t);
Task parse_task(const std::string& s);

struct ExperimentCell {
  DgpConfig dgp;
  Task task = Task::mse;
  int reps = 2500;
  double alpha = 0.05;
  // wald_power: the tested value of beta_{i,4} is -0.3 + shift.
  double wald_shift = 0.0;
  // mse: add the infeasible estimators (Setting A only).
  bool infeasible = false;
};

struct Metric {
  std::string name;
  double value = 0.0;
  double se = 0.0;
  int failures = 0;  // draws where this metric's estimator failed
};

// Under null designs (mse, wald_size, coint_size) a cell aborts when any
// metric's failure rate exceeds 1%; its values are then NaN. Power designs
// report failures without aborting.
struct CellReport {
  ExperimentCell cell;
  int reps = 0;
  int failures = 0;  // draws where at least one estimator failed
  bool aborted = false;
  std::vector<Metric> metrics;
  double seconds = 0.0;
};

// Metric names produced by a task, in report order.
std::vector<std::string> metric_names(Task t, bool infeasible);

// Replications run on `threads` workers; replication r of cell `cell_index`
// draws from derive_seed(seed, {cell_index, r}), so results do not depend
// on the thread count.
CellReport run_experiment(const ExperimentCell& cell, int threads, std::uint64_t seed, std::uint64_t cell_index = 0,
                          const std::function<void(int done, int total)>& progress = {});

}  // namespace fmgls
