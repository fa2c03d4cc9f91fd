/// @file config.hpp
/// @brief Experiment configuration: a strict JSON schema that deserializes
///        only when every domain invariant holds.
#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "leafwise/capacity.hpp"
#include "leafwise/leaf_solver.hpp"

namespace leafwise {

struct ManifoldConfig {
  int n = 0;
  int k = 0;
  std::vector<double> masses;
  double c = 0.0;
  std::vector<double> c_sub;
};

struct PerturbationConfig {
  std::string kind = "builtin_bump";
  double amplitude = 0.0;
  std::vector<double> center;  ///< interleaved (x_1, y_1, ..., x_n, y_n)
  double radius = 1.0;
  std::array<double, 2> t_window{0.0, 1.0};
};

struct IntegratorConfig {
  double h = 1e-2;
};

struct SolverSettings {
  double tol = 1e-10;
  int max_iter = 100;
  int n_starts = 32;
  std::uint64_t seed = 0;
};

struct SweepConfig {
  std::vector<double> amplitudes;
};

struct ExperimentConfig {
  ManifoldConfig manifold;
  PerturbationConfig perturbation;
  IntegratorConfig integrator;
  SolverSettings solver;
  std::optional<SweepConfig> sweep;

  LevelManifold make_manifold() const;
  /// Perturbation with the given amplitude (defaults to the configured one).
  Perturbation make_perturbation(std::optional<double> amplitude_override = {}) const;
  PerturbedSystem make_system(std::optional<double> amplitude_override = {}) const;
  SolveOptions solve_options() const;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// The config file could not be read.
struct ConfigFileError : ConfigError {
  using ConfigError::ConfigError;
};
/// The document is not well-formed JSON.
struct ConfigParseError : ConfigError {
  using ConfigError::ConfigError;
};
/// A field is unknown, missing, mistyped, or violates a domain invariant.
struct ConfigValidationError : ConfigError {
  using ConfigError::ConfigError;
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& json_text);

}  // namespace leafwise
