#include "leafwise/harness.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace leafwise {

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join17(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ';';
    out += fmt17(v[i]);
  }
  return out;
}

std::vector<double> split_doubles(const std::string& cell) {
  std::vector<double> out;
  if (cell.empty()) return out;
  std::size_t pos = 0;
  while (pos <= cell.size()) {
    const std::size_t next = cell.find(';', pos);
    const std::string tok = cell.substr(pos, next == std::string::npos ? next : next - pos);
    out.push_back(std::stod(tok));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

constexpr const char* kCsvHeader =
    "amplitude,hofer_norm_bound,threshold,below_threshold,converged,residual,tau,"
    "integral_defects";

ReportRow solve_one(const ExperimentConfig& config, double amplitude, std::uint64_t seed) {
  ReportRow row;
  row.amplitude = amplitude;

  const LevelManifold manifold = config.make_manifold();
  const PerturbedSystem sys = config.make_system(amplitude);
  row.threshold = capacity_fh(manifold);
  row.hofer_norm_bound = hofer_norm(sys.perturbation).norm;
  row.below_threshold = row.hofer_norm_bound < row.threshold;

  SolveOptions options = config.solve_options();
  options.seed = seed;

  const auto start = std::chrono::steady_clock::now();
  const SearchResult result = solve(manifold, sys, options);
  const auto stop = std::chrono::steady_clock::now();
  row.wall_time_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(stop - start).count();

  row.converged = result.converged;
  row.residual = result.residual_norm;
  row.tau.assign(result.tau_star.tau.data(), result.tau_star.tau.data() + result.tau_star.tau.size());
  if (result.converged) {
    row.integral_defects.assign(result.integral_return.data(),
                                result.integral_return.data() + result.integral_return.size());
  }
  return row;
}

}  // namespace

ReportRow run_single(const ExperimentConfig& config) {
  return solve_one(config, config.perturbation.amplitude, config.solver.seed);
}

std::vector<ReportRow> run_sweep(const ExperimentConfig& config) {
  if (!config.sweep || config.sweep->amplitudes.empty()) {
    throw ConfigValidationError("run_sweep: config has no sweep amplitudes");
  }
  std::vector<ReportRow> rows;
  rows.reserve(config.sweep->amplitudes.size());
  for (std::size_t i = 0; i < config.sweep->amplitudes.size(); ++i) {
    rows.push_back(solve_one(config, config.sweep->amplitudes[i],
                             config.solver.seed + static_cast<std::uint64_t>(i)));
  }
  return rows;
}

std::string report_csv(const std::vector<ReportRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const ReportRow& row : rows) {
    out += fmt17(row.amplitude);
    out += ',';
    out += fmt17(row.hofer_norm_bound);
    out += ',';
    out += fmt17(row.threshold);
    out += ',';
    out += row.below_threshold ? "true" : "false";
    out += ',';
    out += row.converged ? "true" : "false";
    out += ',';
    out += fmt17(row.residual);
    out += ',';
    out += join17(row.tau);
    out += ',';
    out += join17(row.integral_defects);
    out += '\n';
  }
  return out;
}

std::vector<ReportRow> parse_report_csv(std::istream& in) {
  std::vector<ReportRow> rows;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("parse_report_csv: empty input");
  }
  if (line != kCsvHeader) {
    throw std::runtime_error("parse_report_csv: unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t next = line.find(',', pos);
      cells.push_back(line.substr(pos, next == std::string::npos ? next : next - pos));
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (cells.size() != 8) {
      throw std::runtime_error("parse_report_csv: malformed row");
    }
    ReportRow row;
    row.amplitude = std::stod(cells[0]);
    row.hofer_norm_bound = std::stod(cells[1]);
    row.threshold = std::stod(cells[2]);
    row.below_threshold = cells[3] == "true";
    row.converged = cells[4] == "true";
    row.residual = std::stod(cells[5]);
    row.tau = split_doubles(cells[6]);
    row.integral_defects = split_doubles(cells[7]);
    rows.push_back(std::move(row));
  }
  return rows;
}

void run_sweep_to_file(const ExperimentConfig& config, const std::string& path) {
  const std::vector<ReportRow> rows = run_sweep(config);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ConfigFileError("run_sweep: cannot write \"" + path + "\"");
  }
  out << report_csv(rows);
  if (!out) {
    throw ConfigFileError("run_sweep: write to \"" + path + "\" failed");
  }
}

}  // namespace leafwise
