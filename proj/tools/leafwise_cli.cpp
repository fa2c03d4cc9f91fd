// Command-line surface: capacity, contact-check, find and sweep subcommands
// over a JSON experiment config. Exit codes: 0 success, 1 validation error,
// 2 solver non-convergence in `find`.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "leafwise/harness.hpp"

namespace {

void print_row(const leafwise::ReportRow& row) {
  std::printf("amplitude        = %.17g\n", row.amplitude);
  std::printf("hofer_norm_bound = %.17g\n", row.hofer_norm_bound);
  std::printf("threshold        = %.17g\n", row.threshold);
  std::printf("below_threshold  = %s\n", row.below_threshold ? "true" : "false");
  std::printf("converged        = %s\n", row.converged ? "true" : "false");
  std::printf("residual         = %.17g\n", row.residual);
  for (std::size_t i = 0; i < row.tau.size(); ++i) {
    std::printf("tau[%zu]           = %.17g\n", i, row.tau[i]);
  }
  for (std::size_t i = 0; i < row.integral_defects.size(); ++i) {
    std::printf("integral_defect[%zu] = %.17g\n", i, row.integral_defects[i]);
  }
  std::printf("wall_time_ms     = %lld\n", static_cast<long long>(row.wall_time_ms));
}

int run_capacity(const std::string& config_path) {
  const auto config = leafwise::load_config(config_path);
  const auto manifold = config.make_manifold();
  std::printf("capacity_fh = %.17g\n", leafwise::capacity_fh(manifold));
  return 0;
}

int run_contact_check(const std::string& config_path) {
  const auto config = leafwise::load_config(config_path);
  const auto manifold = config.make_manifold();
  const auto check = leafwise::verify_k_contact(manifold);
  std::printf("det(A)   = %.17g\n", check.det);
  std::printf("analytic = %.17g\n", check.analytic);
  std::printf("k-contact: %s\n", check.pass ? "PASS" : "FAIL");
  return check.pass ? 0 : 1;
}

int run_find(const std::string& config_path, std::optional<std::uint64_t> seed,
             const std::string& out_path) {
  auto config = leafwise::load_config(config_path);
  if (seed) config.solver.seed = *seed;
  const leafwise::ReportRow row = leafwise::run_single(config);
  print_row(row);
  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
      throw leafwise::ConfigFileError("find: cannot write \"" + out_path + "\"");
    }
    out << leafwise::report_csv({row});
  }
  return row.converged ? 0 : 2;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_path) {
  const auto config = leafwise::load_config(config_path);
  leafwise::run_sweep_to_file(config, out_path);
  std::printf("wrote %zu rows to %s\n",
              config.sweep ? config.sweep->amplitudes.size() : std::size_t{0}, out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"leafwise: capacity thresholds and leafwise fixed points of "
               "perturbed oscillator systems"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;

  auto* capacity = app.add_subcommand("capacity", "print the capacity threshold of the manifold");
  capacity->add_option("--config", config_path, "experiment config (JSON)")->required();

  auto* contact = app.add_subcommand("contact-check", "certify the k-contact condition");
  contact->add_option("--config", config_path, "experiment config (JSON)")->required();

  auto* find = app.add_subcommand("find", "locate a leafwise fixed point");
  find->add_option("--config", config_path, "experiment config (JSON)")->required();
  std::uint64_t seed_value = 0;
  auto* seed_opt = find->add_option("--seed", seed_value, "override the solver seed");
  find->add_option("--out", out_path, "also write the result as a one-row CSV");

  auto* sweep = app.add_subcommand("sweep", "run the amplitude sweep and write a CSV");
  sweep->add_option("--config", config_path, "experiment config (JSON)")->required();
  sweep->add_option("--out", out_path, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (capacity->parsed()) return run_capacity(config_path);
    if (contact->parsed()) return run_contact_check(config_path);
    if (find->parsed()) {
      if (*seed_opt) seed = seed_value;
      return run_find(config_path, seed, out_path);
    }
    if (sweep->parsed()) return run_sweep_cmd(config_path, out_path);
  } catch (const leafwise::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
