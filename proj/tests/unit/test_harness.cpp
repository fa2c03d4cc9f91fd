#include <cmath>
#include <sstream>

#include "doctest.h"
#include "leafwise/harness.hpp"
#include "test_support.hpp"

using namespace leafwise;

namespace {

// Reference manifold/perturbation as a JSON document; fast solver settings.
std::string reference_json(double amplitude, const std::string& extra = "") {
  std::ostringstream out;
  out << R"({
  "manifold": {"n": 2, "k": 2, "masses": [1.0, 2.0], "c": 3.0, "c_sub": [1.0]},
  "perturbation": {"kind": "builtin_bump", "amplitude": )"
      << amplitude << R"(, "center": [0.4, 0.0, 0.9, 0.3], "radius": 3.2,
                   "t_window": [0.1, 0.9]},
  "integrator": {"h": 0.02},
  "solver": {"tol": 1e-13, "max_iter": 60, "n_starts": 4, "seed": 7})"
      << extra << "\n}";
  return out.str();
}

bool rows_equal_ignoring_time(const ReportRow& a, const ReportRow& b) {
  return a.amplitude == b.amplitude && a.hofer_norm_bound == b.hofer_norm_bound &&
         a.threshold == b.threshold && a.below_threshold == b.below_threshold &&
         a.converged == b.converged && a.residual == b.residual && a.tau == b.tau &&
         a.integral_defects == b.integral_defects;
}

}  // namespace

TEST_CASE("parse_config accepts a valid document verbatim") {
  const ExperimentConfig cfg = parse_config(reference_json(0.1));
  CHECK(cfg.manifold.n == 2);
  CHECK(cfg.manifold.k == 2);
  CHECK(cfg.manifold.masses == std::vector<double>{1.0, 2.0});
  CHECK(cfg.manifold.c == 3.0);
  CHECK(cfg.manifold.c_sub == std::vector<double>{1.0});
  CHECK(cfg.perturbation.kind == "builtin_bump");
  CHECK(cfg.perturbation.amplitude == 0.1);
  CHECK(cfg.perturbation.radius == 3.2);
  CHECK(cfg.perturbation.t_window[0] == 0.1);
  CHECK(cfg.perturbation.t_window[1] == 0.9);
  CHECK(cfg.integrator.h == 0.02);
  CHECK(cfg.solver.tol == 1e-13);
  CHECK(cfg.solver.max_iter == 60);
  CHECK(cfg.solver.n_starts == 4);
  CHECK(cfg.solver.seed == 7);
  CHECK_FALSE(cfg.sweep.has_value());
}

TEST_CASE("config errors are distinct and name the offence") {
  SUBCASE("missing file") {
    CHECK_THROWS_AS(load_config("/nonexistent/path.json"), ConfigFileError);
  }

  SUBCASE("malformed document") {
    CHECK_THROWS_AS(parse_config("{ not json"), ConfigParseError);
  }

  SUBCASE("admissibility violation cites the invariant") {
    const std::string doc = R"({
      "manifold": {"n": 3, "k": 2, "masses": [1.0, 1.0, 1.0], "c": 0.4, "c_sub": [1.0]},
      "perturbation": {"kind": "builtin_bump", "amplitude": 0.0,
                       "center": [0,0,0,0,0,0], "radius": 1.0, "t_window": [0.0, 1.0]},
      "integrator": {"h": 0.01},
      "solver": {"tol": 1e-9, "max_iter": 10, "n_starts": 1, "seed": 0}
    })";
    CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("c - 0.5*sum(m_j*c_j)"),
                         ConfigValidationError);
  }

  SUBCASE("unknown fields are rejected by name") {
    const std::string doc = R"({
      "manifold": {"n": 2, "k": 2, "masses": [1.0, 2.0], "c": 3.0, "c_sub": [1.0]},
      "perturbation": {"kind": "builtin_bump", "amplitude": 0.1, "epsilon": 1.0,
                       "center": [0.4, 0.0, 0.9, 0.3], "radius": 3.2, "t_window": [0.1, 0.9]},
      "integrator": {"h": 0.02},
      "solver": {"tol": 1e-9, "max_iter": 10, "n_starts": 1, "seed": 0}
    })";
    CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("epsilon"), ConfigValidationError);
  }

  SUBCASE("missing and mistyped fields are named") {
    CHECK_THROWS_WITH_AS(parse_config(R"({"manifold": {}})"), doctest::Contains("\"n\""),
                         ConfigValidationError);
    std::string doc = reference_json(0.1);
    const auto pos = doc.find("\"h\": 0.02");
    doc.replace(pos, 9, "\"h\": \"fast\"");
    CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("\"h\""), ConfigValidationError);
  }

  SUBCASE("tabulated perturbations are not file-configurable") {
    std::string doc = reference_json(0.1);
    const auto pos = doc.find("builtin_bump");
    doc.replace(pos, 12, "tabulated");
    CHECK_THROWS_AS(parse_config(doc), ConfigValidationError);
  }

  SUBCASE("center must have 2n entries") {
    std::string doc = reference_json(0.1);
    const std::string needle = "[0.4, 0.0, 0.9, 0.3]";
    doc.replace(doc.find(needle), needle.size(), "[0.4, 0.0, 0.9]");
    CHECK_THROWS_WITH_AS(parse_config(doc), doctest::Contains("2n"), ConfigValidationError);
  }
}

TEST_CASE("run_single") {
  SUBCASE("amplitude 0 converges to the identity") {
    const ReportRow row = run_single(parse_config(reference_json(0.0)));
    CHECK(row.converged);
    CHECK(row.residual < 1e-12);
    CHECK(row.below_threshold);  // norm 0 < pi
    CHECK(row.threshold == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(row.hofer_norm_bound == 0.0);
    REQUIRE(row.integral_defects.size() == 2);
    CHECK(row.integral_defects[0] < 1e-12);
    CHECK(row.integral_defects[1] < 1e-12);
  }

  SUBCASE("norm bound at or above the threshold clears the flag") {
    const std::string doc = R"({
      "manifold": {"n": 2, "k": 2, "masses": [1.0, 2.0], "c": 3.0, "c_sub": [1.0]},
      "perturbation": {"kind": "builtin_bump", "amplitude": 4.0,
                       "center": [0.4, 0.0, 0.9, 0.3], "radius": 3.2, "t_window": [0.1, 0.9]},
      "integrator": {"h": 0.05},
      "solver": {"tol": 1e-9, "max_iter": 3, "n_starts": 1, "seed": 0}
    })";
    const ReportRow row = run_single(parse_config(doc));
    CHECK_FALSE(row.below_threshold);  // 4.0 >= pi, converged or not
  }
}

TEST_CASE("CSV round-trips to the last printed digit") {
  std::vector<ReportRow> rows(2);
  rows[0].amplitude = 0.1 * kPi;
  rows[0].hofer_norm_bound = 0.1 * kPi;
  rows[0].threshold = kPi;
  rows[0].below_threshold = true;
  rows[0].converged = true;
  rows[0].residual = 3.2459871236412299e-12;
  rows[0].tau = {0.12345678901234567, -2.5};
  rows[0].integral_defects = {1e-9, 7.7e-10};
  rows[1].amplitude = 0.0;
  rows[1].converged = false;
  rows[1].residual = 0.25;
  rows[1].tau = {0.0, 0.0};
  // non-converged rows carry no defects

  const std::string csv = report_csv(rows);
  std::istringstream in(csv);
  const std::vector<ReportRow> parsed = parse_report_csv(in);
  REQUIRE(parsed.size() == 2);
  CHECK(rows_equal_ignoring_time(parsed[0], rows[0]));
  CHECK(rows_equal_ignoring_time(parsed[1], rows[1]));
}

TEST_CASE("run_sweep") {
  const std::string doc =
      reference_json(0.0, ",\n  \"sweep\": {\"amplitudes\": [0.0, 0.31415926535897931]}");
  const ExperimentConfig cfg = parse_config(doc);

  SUBCASE("deterministic byte-identical CSV") {
    const std::string a = report_csv(run_sweep(cfg));
    const std::string b = report_csv(run_sweep(cfg));
    CHECK(a == b);
  }

  SUBCASE("rows are independent: each equals its standalone run") {
    const std::vector<ReportRow> rows = run_sweep(cfg);
    REQUIRE(rows.size() == 2);
    // the amplitude-0 row is an identity solve
    CHECK(rows[0].converged);
    CHECK(rows[0].residual < 1e-12);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ExperimentConfig single = cfg;
      single.perturbation.amplitude = cfg.sweep->amplitudes[i];
      single.solver.seed = cfg.solver.seed + i;
      single.sweep.reset();
      CHECK(rows_equal_ignoring_time(run_single(single), rows[i]));
    }
  }

  SUBCASE("sweep requires amplitudes") {
    ExperimentConfig no_sweep = cfg;
    no_sweep.sweep.reset();
    CHECK_THROWS_AS(run_sweep(no_sweep), ConfigValidationError);
  }
}
