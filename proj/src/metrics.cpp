#include "pcmlp/metrics.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "pcmlp/errors.hpp"

namespace pcmlp {

MetricsRow to_row(const IterationRecord& r) {
  MetricsRow row;
  row.iter = r.iter;
  row.model_error = r.model_error;
  row.bonus_min = r.bonus_min;
  row.bonus_mean = r.bonus_mean;
  row.bonus_max = r.bonus_max;
  row.plan_value_model = r.plan_value_model;
  row.value_true_mean = r.value_true_mean;
  row.value_true_se = r.value_true_se;
  row.avg_bonus_per_step = r.avg_bonus_per_step;
  row.info_gain = r.info_gain;
  row.coverage = r.coverage;
  row.feasible = r.feasible;
  return row;
}

MetricsRow to_row(const OdpcRecord& r) {
  MetricsRow row;
  row.iter = r.iter;
  row.model_error = r.model_error;
  row.plan_value_model = r.optimistic_value;
  row.value_true_mean = r.value_true;
  row.value_true_se = 0.0;
  row.feasible = r.truth_in_region;
  return row;
}

namespace {

void put(std::ostringstream& out, const std::optional<double>& v) {
  out << ',';
  if (!v) return;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", *v);
  out << buf;
}

std::optional<double> take(const std::string& field, int line) {
  if (field.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) {
    throw ConfigError("metrics line " + std::to_string(line) + ": bad number '" + field + "'");
  }
  return v;
}

}  // namespace

std::string emit_metrics(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << kMetricsHeader << '\n';
  for (const auto& r : rows) {
    out << r.iter;
    put(out, r.model_error);
    put(out, r.bonus_min);
    put(out, r.bonus_mean);
    put(out, r.bonus_max);
    put(out, r.plan_value_model);
    put(out, r.value_true_mean);
    put(out, r.value_true_se);
    put(out, r.avg_bonus_per_step);
    put(out, r.info_gain);
    put(out, r.coverage);
    out << ',';
    if (r.feasible) out << (*r.feasible ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

std::vector<MetricsRow> parse_metrics(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) throw ConfigError("metrics: unexpected header");
  std::vector<MetricsRow> rows;
  int n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 12) throw ConfigError("metrics line " + std::to_string(n) + ": expected 12 fields");
    MetricsRow r;
    r.iter = std::stoi(f[0]);
    r.model_error = take(f[1], n);
    r.bonus_min = take(f[2], n);
    r.bonus_mean = take(f[3], n);
    r.bonus_max = take(f[4], n);
    r.plan_value_model = take(f[5], n);
    r.value_true_mean = take(f[6], n);
    r.value_true_se = take(f[7], n);
    r.avg_bonus_per_step = take(f[8], n);
    r.info_gain = take(f[9], n);
    r.coverage = take(f[10], n);
    if (!f[11].empty()) r.feasible = f[11] == "1";
    rows.push_back(r);
  }
  return rows;
}

}  // namespace pcmlp
