#include "leafwise/phase_space.hpp"

#include <cmath>
#include <stdexcept>

namespace leafwise {

double wrap_angle_2pi(double a) {
  double w = std::fmod(a, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

double wrap_angle_pi(double a) {
  double w = std::remainder(a, kTwoPi);  // in [-pi, pi]
  if (w <= -kPi) w += kTwoPi;
  return w;
}

PhasePoint::PhasePoint(Eigen::VectorXd x_in, Eigen::VectorXd y_in)
    : x(std::move(x_in)), y(std::move(y_in)) {
  if (x.size() != y.size()) {
    throw std::invalid_argument("PhasePoint: x and y must have the same length");
  }
  if (!x.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("PhasePoint: entries must be finite");
  }
}

ActionAngle::ActionAngle(Eigen::VectorXd r_in, Eigen::VectorXd theta_in)
    : r(std::move(r_in)), theta(std::move(theta_in)) {
  if (r.size() != theta.size()) {
    throw std::invalid_argument("ActionAngle: r and theta must have the same length");
  }
  if (!r.allFinite() || !theta.allFinite()) {
    throw std::invalid_argument("ActionAngle: entries must be finite");
  }
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    if (r[j] < 0.0) {
      throw std::invalid_argument("ActionAngle: radii must be nonnegative");
    }
    theta[j] = wrap_angle_2pi(theta[j]);
  }
}

ActionAngle to_action_angle(const PhasePoint& p) {
  const Eigen::Index n = p.planes();
  Eigen::VectorXd r(n);
  Eigen::VectorXd theta(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    r[j] = std::hypot(p.x[j], p.y[j]);
    theta[j] = (r[j] == 0.0) ? 0.0 : wrap_angle_2pi(std::atan2(-p.y[j], p.x[j]));
  }
  return ActionAngle(std::move(r), std::move(theta));
}

PhasePoint from_action_angle(const ActionAngle& a) {
  const Eigen::Index n = a.planes();
  Eigen::VectorXd x(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    x[j] = a.r[j] * std::cos(a.theta[j]);
    y[j] = -a.r[j] * std::sin(a.theta[j]);
  }
  return PhasePoint(std::move(x), std::move(y));
}

Eigen::VectorXd to_interleaved(const PhasePoint& p) {
  const Eigen::Index n = p.planes();
  Eigen::VectorXd v(2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    v[2 * j] = p.x[j];
    v[2 * j + 1] = p.y[j];
  }
  return v;
}

PhasePoint from_interleaved(const Eigen::VectorXd& v) {
  if (v.size() % 2 != 0) {
    throw std::invalid_argument("from_interleaved: vector length must be even");
  }
  const Eigen::Index n = v.size() / 2;
  Eigen::VectorXd x(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    x[j] = v[2 * j];
    y[j] = v[2 * j + 1];
  }
  return PhasePoint(std::move(x), std::move(y));
}

Eigen::MatrixXd symplectic_form_matrix(Eigen::Index n) {
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    omega(2 * j, 2 * j + 1) = 1.0;
    omega(2 * j + 1, 2 * j) = -1.0;
  }
  return omega;
}

double symplectic_defect(const Eigen::MatrixXd& J) {
  if (J.rows() != J.cols() || J.rows() % 2 != 0 || J.rows() == 0) {
    throw std::invalid_argument("symplectic_defect: matrix must be square of even dimension");
  }
  const Eigen::MatrixXd omega = symplectic_form_matrix(J.rows() / 2);
  return (J.transpose() * omega * J - omega).cwiseAbs().maxCoeff();
}

}  // namespace leafwise
