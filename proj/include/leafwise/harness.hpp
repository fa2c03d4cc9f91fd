/// @file harness.hpp
/// @brief Experiment orchestration: single runs, threshold sweeps and the
///        deterministic CSV report format.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "leafwise/config.hpp"

namespace leafwise {

struct ReportRow {
  double amplitude = 0.0;
  double hofer_norm_bound = 0.0;
  double threshold = 0.0;
  bool below_threshold = false;  ///< hofer_norm_bound < threshold
  bool converged = false;
  double residual = 0.0;
  std::vector<double> tau;
  std::vector<double> integral_defects;
  std::int64_t wall_time_ms = 0;  ///< diagnostic only; not serialized
};

/// Threshold, norm bound, solve and return certification for one amplitude.
ReportRow run_single(const ExperimentConfig& config);

/// One row per sweep amplitude; row i uses solver seed = base seed + i.
/// Rows are mutually independent, so any execution order produces the same
/// list.
std::vector<ReportRow> run_sweep(const ExperimentConfig& config);

/// CSV with a header row, doubles printed with 17 significant digits and
/// vector fields joined by ';'. wall_time_ms is deliberately not a column:
/// the file is byte-reproducible across runs.
std::string report_csv(const std::vector<ReportRow>& rows);
std::vector<ReportRow> parse_report_csv(std::istream& in);

/// Computes all rows first, then writes the file in row order.
void run_sweep_to_file(const ExperimentConfig& config, const std::string& path);

}  // namespace leafwise
