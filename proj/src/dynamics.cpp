#include "leafwise/dynamics.hpp"

#include <cmath>
#include <string>

namespace leafwise {

namespace {

// exp(1 - 1/(1 - q)) for q = s^2 in [0, 1); smooth in q, peak 1 at q = 0.
double bump_of_sq(double q) {
  if (q >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - q));
}

// d/dq of bump_of_sq.
double bump_of_sq_prime(double q) {
  if (q >= 1.0) return 0.0;
  const double one_minus = 1.0 - q;
  return -bump_of_sq(q) / (one_minus * one_minus);
}

double time_profile(const Perturbation& h1, double t) {
  if (t <= h1.t0 || t >= h1.t1) return 0.0;
  const double s = 2.0 * (t - h1.t0) / (h1.t1 - h1.t0) - 1.0;  // in (-1, 1)
  return bump_of_sq(s * s);
}

double center_distance_sq(const Perturbation& h1, const PhasePoint& p) {
  double d2 = 0.0;
  for (Eigen::Index j = 0; j < p.planes(); ++j) {
    const double dx = p.x[j] - h1.center.x[j];
    const double dy = p.y[j] - h1.center.y[j];
    d2 += dx * dx + dy * dy;
  }
  return d2;
}

}  // namespace

double Perturbation::value(double t, const PhasePoint& p) const {
  if (amplitude == 0.0) return 0.0;
  if (t <= t0 || t >= t1) return 0.0;
  const double q = center_distance_sq(*this, p) / (radius * radius);
  if (q >= 1.0) return 0.0;
  if (kind == PerturbationKind::builtin_bump) {
    return amplitude * time_profile(*this, t) * bump_of_sq(q);
  }
  return amplitude * table(t, p);
}

void Perturbation::gradient(double t, const PhasePoint& p, Eigen::VectorXd& dx,
                            Eigen::VectorXd& dy) const {
  const Eigen::Index n = p.planes();
  dx.setZero(n);
  dy.setZero(n);
  if (amplitude == 0.0 || t <= t0 || t >= t1) return;

  if (kind == PerturbationKind::builtin_bump) {
    const double rho2 = radius * radius;
    const double q = center_distance_sq(*this, p) / rho2;
    if (q >= 1.0) return;
    const double factor = amplitude * time_profile(*this, t) * bump_of_sq_prime(q) * 2.0 / rho2;
    for (Eigen::Index j = 0; j < n; ++j) {
      dx[j] = factor * (p.x[j] - center.x[j]);
      dy[j] = factor * (p.y[j] - center.y[j]);
    }
    return;
  }

  // Tabulated: central differences on the masked value.
  PhasePoint probe = p;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double hx = 1e-6 * (1.0 + std::abs(p.x[j]));
    probe.x[j] = p.x[j] + hx;
    const double fp = value(t, probe);
    probe.x[j] = p.x[j] - hx;
    const double fm = value(t, probe);
    probe.x[j] = p.x[j];
    dx[j] = (fp - fm) / (2.0 * hx);

    const double hy = 1e-6 * (1.0 + std::abs(p.y[j]));
    probe.y[j] = p.y[j] + hy;
    const double gp = value(t, probe);
    probe.y[j] = p.y[j] - hy;
    const double gm = value(t, probe);
    probe.y[j] = p.y[j];
    dy[j] = (gp - gm) / (2.0 * hy);
  }
}

void Perturbation::validate(Eigen::Index n) const {
  if (!std::isfinite(amplitude)) {
    throw std::invalid_argument("Perturbation: amplitude must be finite");
  }
  if (center.planes() != n) {
    throw std::invalid_argument("Perturbation: center must have n planes");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("Perturbation: radius must be positive");
  }
  if (!(0.0 <= t0 && t0 < t1 && t1 <= 1.0)) {
    throw std::invalid_argument("Perturbation: t_window must satisfy 0 <= t0 < t1 <= 1");
  }
  if (kind == PerturbationKind::tabulated && amplitude != 0.0 && !table) {
    throw std::invalid_argument("Perturbation: tabulated kind requires a table callable");
  }
}

Perturbation make_builtin_bump(double amplitude, PhasePoint center, double radius, double t0,
                               double t1) {
  Perturbation h1;
  h1.kind = PerturbationKind::builtin_bump;
  h1.amplitude = amplitude;
  h1.center = std::move(center);
  h1.radius = radius;
  h1.t0 = t0;
  h1.t1 = t1;
  h1.validate(h1.center.planes());
  return h1;
}

PerturbedSystem::PerturbedSystem(LevelManifold manifold_in, Perturbation perturbation_in,
                                 double step_in, double substep_tol_in, int substep_max_iter_in)
    : manifold(std::move(manifold_in)),
      perturbation(std::move(perturbation_in)),
      step(step_in),
      substep_tol(substep_tol_in),
      substep_max_iter(substep_max_iter_in) {
  perturbation.validate(manifold.n());
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("PerturbedSystem: step must be positive");
  }
  if (!perturbation.is_zero() && step > 0.25 * (perturbation.t1 - perturbation.t0)) {
    throw std::invalid_argument(
        "PerturbedSystem: step must satisfy h <= (t1 - t0)/4 for an active perturbation");
  }
  if (!(substep_tol > 0.0) || substep_max_iter < 1) {
    throw std::invalid_argument("PerturbedSystem: invalid substep solver settings");
  }
}

StepConvergenceError::StepConvergenceError(std::size_t step_index, double t_mid)
    : std::runtime_error("implicit midpoint stage did not converge at step " +
                         std::to_string(step_index) + " (t = " + std::to_string(t_mid) + ")"),
      step_index_(step_index) {}

PhasePoint flow_h0(const Eigen::VectorXd& masses, const PhasePoint& p, double t) {
  if (masses.size() != p.planes()) {
    throw std::invalid_argument("flow_h0: masses and point dimension mismatch");
  }
  const Eigen::Index n = p.planes();
  Eigen::VectorXd x(n);
  Eigen::VectorXd y(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double c = std::cos(masses[j] * t);
    const double s = std::sin(masses[j] * t);
    x[j] = p.x[j] * c - p.y[j] * s;
    y[j] = p.x[j] * s + p.y[j] * c;
  }
  return PhasePoint(std::move(x), std::move(y));
}

namespace {

// One implicit-midpoint step of the H1 kick with time frozen at t_mid:
// solve w = z + h * X_{H1}(t_mid, (z + w)/2) by fixed-point iteration.
PhasePoint midpoint_kick(const PerturbedSystem& sys, const PhasePoint& z, double t_mid, double h,
                         std::size_t step_index) {
  const Eigen::Index n = z.planes();
  Eigen::VectorXd wx = z.x;
  Eigen::VectorXd wy = z.y;
  Eigen::VectorXd gx(n), gy(n), mx(n), my(n);
  for (int it = 0; it < sys.substep_max_iter; ++it) {
    mx = 0.5 * (z.x + wx);
    my = 0.5 * (z.y + wy);
    sys.perturbation.gradient(t_mid, PhasePoint(mx, my), gx, gy);
    const Eigen::VectorXd nx = z.x - h * gy;  // xdot = -dH/dy
    const Eigen::VectorXd ny = z.y + h * gx;  // ydot = +dH/dx
    if (!nx.allFinite() || !ny.allFinite()) {
      throw StepConvergenceError(step_index, t_mid);
    }
    const double delta =
        std::max((nx - wx).cwiseAbs().maxCoeff(), (ny - wy).cwiseAbs().maxCoeff());
    wx = nx;
    wy = ny;
    if (delta <= sys.substep_tol) {
      return PhasePoint(std::move(wx), std::move(wy));
    }
  }
  throw StepConvergenceError(step_index, t_mid);
}

}  // namespace

PhasePoint flow_perturbed(const PerturbedSystem& sys, const PhasePoint& p, double from,
                          double to) {
  if (!(from <= to)) {
    throw std::invalid_argument("flow_perturbed: requires from <= to");
  }
  const Eigen::VectorXd& m = sys.manifold.masses();
  if (sys.perturbation.is_zero()) {
    return flow_h0(m, p, to - from);
  }
  const double w0 = std::max(from, sys.perturbation.t0);
  const double w1 = std::min(to, sys.perturbation.t1);
  if (!(w0 < w1)) {
    return flow_h0(m, p, to - from);
  }

  PhasePoint z = flow_h0(m, p, w0 - from);
  const auto nsteps =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((w1 - w0) / sys.step - 1e-9)));
  const double h = (w1 - w0) / static_cast<double>(nsteps);
  for (std::size_t s = 0; s < nsteps; ++s) {
    const double t = w0 + h * static_cast<double>(s);
    z = flow_h0(m, z, 0.5 * h);
    z = midpoint_kick(sys, z, t + 0.5 * h, h, s);
    z = flow_h0(m, z, 0.5 * h);
  }
  return flow_h0(m, z, to - w1);
}

PhasePoint composite_map(const PerturbedSystem& sys, const PhasePoint& p) {
  return flow_h0(sys.manifold.masses(), flow_perturbed(sys, p, 0.0, 1.0), -1.0);
}

}  // namespace leafwise
