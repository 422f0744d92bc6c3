#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hmn/generator.hpp"
#include "hmn/metrics.hpp"

namespace hmn {

// One benchmark run: per instance, an exact solve followed by the 4x4
// algorithm grid (row w = 0 holds IJGP(i), column i = 0 holds pure
// RB-sampling, interior cells IJGP-RB-Sampling), then averaging into the
// report. A cell is budgeted either by wall-clock time or by a fixed sample
// count; the fixed-count mode is fully deterministic.
struct ExperimentConfig {
  std::vector<GeneratorParams> params;  // instance classes (seed field ignored)
  int instances = 1;                    // per class
  double evidence_fraction = 0.1;
  int ijgp_iterations = 10;
  double ijgp_tolerance = 1e-8;
  std::optional<double> time_budget_seconds;
  long long samples_per_cell = 1000;
  // When false, the wall_ms column is written as 0 so that fixed-count runs
  // produce byte-identical CSVs.
  bool record_wall_time = true;
  std::vector<int> i_values = {0, 2, 4, 6};
  std::vector<int> w_values = {0, 2, 4, 6};
  // Exact-solve memory guard: estimated table cells across the join tree.
  long long memory_guard_cells = 20000000;
  uint64_t seed = 1;
  std::string output_csv = "results.csv";
};

ExperimentConfig parse_experiment_config(const std::string& json_text);

struct CellResult {
  std::string algorithm;  // ijgp | pure-rb | ijgp-rb
  int i = 0, w = 0;
  bool valid = false;  // metrics computed (sampling may reject everything)
  ErrorMetrics metrics;
  double rejection_rate = -1.0;  // < 0 for non-samplers
  double wall_ms = 0.0;
  // Continuous accuracy, reported separately from the discrete metrics.
  double cont_mean_abs_err = -1.0;
  double cont_var_abs_err = -1.0;
};

struct InstanceResult {
  long long instance_id = 0;
  int tightness = 0;
  uint64_t seed = 0;
  bool skipped = false;  // exact solve tripped the memory guard
  std::vector<CellResult> cells;
};

struct ErrorReport {
  std::vector<InstanceResult> instances;
  std::vector<int> i_values, w_values;

  // Mean over non-skipped instances of one metric in one grid cell; NaN when
  // nothing was valid. `metric` is abs|rel|kl|rejection.
  double mean_cell(const std::string& metric, int w, int i) const;
};

// Runs the whole protocol and writes `output_csv` (plus a
// `<output>.continuous.csv` side file). Returns the in-memory report.
ErrorReport run_experiment(const ExperimentConfig& config);

// Tables 1/2 style text rendering of the aggregated grids.
std::string report_summary(const ErrorReport& report);

void write_report_csv(const ErrorReport& report, const ExperimentConfig& config);

}  // namespace hmn
