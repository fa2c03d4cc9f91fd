/// @file phase_space.hpp
/// @brief Cartesian and action-angle charts of (R^{2n}, omega_0) plus the
///        symplecticity diagnostic used by the integrator tests.
///
/// Conventions, used everywhere in this project:
///   * a phase point is (x_1, y_1, ..., x_n, y_n); matrices acting on phase
///     space use this interleaved ordering, so the form matrix of
///     omega_0 = sum_j dx_j ^ dy_j is block diagonal with 2x2 blocks,
///   * polar coordinates follow x_j - i y_j = r_j e^{i theta_j}, which forces
///     y_j = -r_j sin(theta_j),
///   * angles are canonically wrapped into [0, 2pi).
#pragma once

#include <Eigen/Core>

namespace leafwise {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Wrap an angle into [0, 2pi).
double wrap_angle_2pi(double a);

/// Wrap an angle into (-pi, pi].
double wrap_angle_pi(double a);

/// A point of R^{2n}; constructors reject non-finite entries.
struct PhasePoint {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  PhasePoint() = default;
  PhasePoint(Eigen::VectorXd x_in, Eigen::VectorXd y_in);

  Eigen::Index planes() const { return x.size(); }
};

/// Polar representation (r_j, theta_j) of a phase point.
///
/// Invariants enforced at construction: r_j >= 0 and theta_j in [0, 2pi)
/// (angles are wrapped, radii are rejected if negative).
struct ActionAngle {
  Eigen::VectorXd r;
  Eigen::VectorXd theta;

  ActionAngle() = default;
  ActionAngle(Eigen::VectorXd r_in, Eigen::VectorXd theta_in);

  Eigen::Index planes() const { return r.size(); }
};

/// r_j = sqrt(x_j^2 + y_j^2), theta_j = arg(x_j - i y_j) in [0, 2pi).
/// At r_j = 0 the angle is 0 by convention, so this is total.
ActionAngle to_action_angle(const PhasePoint& p);

/// x_j = r_j cos(theta_j), y_j = -r_j sin(theta_j).
PhasePoint from_action_angle(const ActionAngle& a);

/// Flatten to the interleaved vector (x_1, y_1, ..., x_n, y_n).
Eigen::VectorXd to_interleaved(const PhasePoint& p);
PhasePoint from_interleaved(const Eigen::VectorXd& v);

/// Matrix of omega_0 in the interleaved ordering (2x2 blocks [[0,1],[-1,0]]).
Eigen::MatrixXd symplectic_form_matrix(Eigen::Index n);

/// || J^T Omega J - Omega || in the max-entry norm; 0 iff J is symplectic.
/// Throws std::invalid_argument unless J is square of even dimension.
double symplectic_defect(const Eigen::MatrixXd& J);

}  // namespace leafwise
