#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pcmlp/config.hpp"
#include "pcmlp/metrics.hpp"

namespace pcmlp {

struct ExperimentOutput {
  std::vector<MetricsRow> rows;
  // Ordered key/value lines for the summary file.
  std::vector<std::pair<std::string, std::string>> summary;
};

// Runs the experiment named in cfg.experiment. Sweeps (ablation, coverage)
// concatenate the rows of every arm in sweep order; `iter` restarts per arm.
ExperimentOutput run_experiment(const RunConfig& cfg);

// Writes metrics.csv, resolved_config.ini and summary.txt into `dir`.
void write_outputs(const RunConfig& cfg, const ExperimentOutput& out, const std::string& dir);

// Ratio avg_bonus_per_step(last) / avg_bonus_per_step(first).
double bonus_decay_ratio(const std::vector<IterationRecord>& records);

}  // namespace pcmlp
