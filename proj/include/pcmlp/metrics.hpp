#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pcmlp/odpc.hpp"
#include "pcmlp/pcmlp.hpp"

namespace pcmlp {

// One CSV row. Absent values are written as empty fields.
struct MetricsRow {
  int iter = 0;
  std::optional<double> model_error;
  std::optional<double> bonus_min;
  std::optional<double> bonus_mean;
  std::optional<double> bonus_max;
  std::optional<double> plan_value_model;
  std::optional<double> value_true_mean;
  std::optional<double> value_true_se;
  std::optional<double> avg_bonus_per_step;
  std::optional<double> info_gain;
  std::optional<double> coverage;
  std::optional<bool> feasible;

  bool operator==(const MetricsRow&) const = default;
};

inline constexpr const char* kMetricsHeader =
    "iter,model_error,bonus_min,bonus_mean,bonus_max,plan_value_model,value_true_mean,value_true_se,"
    "avg_bonus_per_step,info_gain,coverage,feasible";

MetricsRow to_row(const IterationRecord& r);
MetricsRow to_row(const OdpcRecord& r);

// Header line plus one line per row; floats use 10 significant digits.
std::string emit_metrics(const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> parse_metrics(const std::string& csv);

}  // namespace pcmlp
