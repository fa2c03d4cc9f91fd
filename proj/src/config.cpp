#include "leafwise/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace leafwise {

namespace {

using nlohmann::json;

void require_object(const json& node, const std::string& ctx) {
  if (!node.is_object()) {
    throw ConfigValidationError("config: \"" + ctx + "\" must be an object");
  }
}

void reject_unknown(const json& node, const std::string& ctx,
                    std::initializer_list<const char*> allowed) {
  for (const auto& item : node.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigValidationError("config: unknown field \"" + item.key() + "\" in " + ctx);
    }
  }
}

const json& require_field(const json& node, const std::string& ctx, const char* key) {
  auto it = node.find(key);
  if (it == node.end()) {
    throw ConfigValidationError("config: missing field \"" + std::string(key) + "\" in " + ctx);
  }
  return *it;
}

template <typename T>
T field_as(const json& node, const std::string& ctx, const char* key) {
  try {
    return require_field(node, ctx, key).get<T>();
  } catch (const ConfigValidationError&) {
    throw;
  } catch (const json::exception&) {
    throw ConfigValidationError("config: field \"" + std::string(key) + "\" in " + ctx +
                                " has the wrong type");
  }
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

LevelManifold ExperimentConfig::make_manifold() const {
  try {
    return LevelManifold(manifold.n, manifold.k, to_vector(manifold.masses), manifold.c,
                         to_vector(manifold.c_sub));
  } catch (const std::invalid_argument& e) {
    throw ConfigValidationError(std::string("config: manifold invalid: ") + e.what());
  }
}

Perturbation ExperimentConfig::make_perturbation(std::optional<double> amplitude_override) const {
  if (perturbation.kind != "builtin_bump") {
    throw ConfigValidationError(
        "config: perturbation kind \"" + perturbation.kind +
        "\" cannot be loaded from a file; only \"builtin_bump\" is configurable");
  }
  if (perturbation.center.size() != static_cast<std::size_t>(2 * manifold.n)) {
    throw ConfigValidationError("config: perturbation center must have 2n entries");
  }
  try {
    return make_builtin_bump(amplitude_override.value_or(perturbation.amplitude),
                             from_interleaved(to_vector(perturbation.center)),
                             perturbation.radius, perturbation.t_window[0],
                             perturbation.t_window[1]);
  } catch (const std::invalid_argument& e) {
    throw ConfigValidationError(std::string("config: perturbation invalid: ") + e.what());
  }
}

PerturbedSystem ExperimentConfig::make_system(std::optional<double> amplitude_override) const {
  try {
    return PerturbedSystem(make_manifold(), make_perturbation(amplitude_override), integrator.h);
  } catch (const std::invalid_argument& e) {
    throw ConfigValidationError(std::string("config: integrator invalid: ") + e.what());
  }
}

SolveOptions ExperimentConfig::solve_options() const {
  SolveOptions options;
  options.tol = solver.tol;
  options.max_iter = solver.max_iter;
  options.n_starts = solver.n_starts;
  options.seed = solver.seed;
  return options;
}

ExperimentConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigParseError(std::string("config: malformed document: ") + e.what());
  }
  require_object(doc, "document root");
  reject_unknown(doc, "document root", {"manifold", "perturbation", "integrator", "solver", "sweep"});

  ExperimentConfig cfg;

  const json& man = require_field(doc, "document root", "manifold");
  require_object(man, "manifold");
  reject_unknown(man, "manifold", {"n", "k", "masses", "c", "c_sub"});
  cfg.manifold.n = field_as<int>(man, "manifold", "n");
  cfg.manifold.k = field_as<int>(man, "manifold", "k");
  cfg.manifold.masses = field_as<std::vector<double>>(man, "manifold", "masses");
  cfg.manifold.c = field_as<double>(man, "manifold", "c");
  cfg.manifold.c_sub = field_as<std::vector<double>>(man, "manifold", "c_sub");

  const json& pert = require_field(doc, "document root", "perturbation");
  require_object(pert, "perturbation");
  reject_unknown(pert, "perturbation", {"kind", "amplitude", "center", "radius", "t_window"});
  cfg.perturbation.kind = field_as<std::string>(pert, "perturbation", "kind");
  cfg.perturbation.amplitude = field_as<double>(pert, "perturbation", "amplitude");
  cfg.perturbation.center = field_as<std::vector<double>>(pert, "perturbation", "center");
  cfg.perturbation.radius = field_as<double>(pert, "perturbation", "radius");
  const auto window = field_as<std::vector<double>>(pert, "perturbation", "t_window");
  if (window.size() != 2) {
    throw ConfigValidationError("config: perturbation t_window must have exactly 2 entries");
  }
  cfg.perturbation.t_window = {window[0], window[1]};

  const json& integ = require_field(doc, "document root", "integrator");
  require_object(integ, "integrator");
  reject_unknown(integ, "integrator", {"h"});
  cfg.integrator.h = field_as<double>(integ, "integrator", "h");

  const json& solver = require_field(doc, "document root", "solver");
  require_object(solver, "solver");
  reject_unknown(solver, "solver", {"tol", "max_iter", "n_starts", "seed"});
  cfg.solver.tol = field_as<double>(solver, "solver", "tol");
  cfg.solver.max_iter = field_as<int>(solver, "solver", "max_iter");
  cfg.solver.n_starts = field_as<int>(solver, "solver", "n_starts");
  cfg.solver.seed = field_as<std::uint64_t>(solver, "solver", "seed");

  if (auto it = doc.find("sweep"); it != doc.end()) {
    require_object(*it, "sweep");
    reject_unknown(*it, "sweep", {"amplitudes"});
    SweepConfig sweep;
    sweep.amplitudes = field_as<std::vector<double>>(*it, "sweep", "amplitudes");
    if (sweep.amplitudes.empty()) {
      throw ConfigValidationError("config: sweep amplitudes must be non-empty");
    }
    cfg.sweep = std::move(sweep);
  }

  if (!(cfg.solver.tol > 0.0)) {
    throw ConfigValidationError("config: solver tol must be positive");
  }
  if (cfg.solver.max_iter < 0 || cfg.solver.n_starts < 1) {
    throw ConfigValidationError("config: solver max_iter must be >= 0 and n_starts >= 1");
  }

  // Building the domain objects enforces every remaining invariant, Eq.-level
  // admissibility included; any violation surfaces as a validation error.
  cfg.make_system();
  if (cfg.sweep) {
    for (double a : cfg.sweep->amplitudes) {
      cfg.make_system(a);
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigFileError("config: cannot read \"" + path + "\"");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace leafwise
