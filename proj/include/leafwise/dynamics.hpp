/// @file dynamics.hpp
/// @brief Exact unperturbed flow, the splitting integrator for H0 + H1 and
///        the composite return map whose leafwise fixed points are sought.
///
/// Hamiltonian vector fields follow omega(X_H, .) = -dH, which for
/// H0 = 1/2 sum m_j (x_j^2 + y_j^2) gives z_j(t) = e^{-i m_j t} z_j(0) in
/// z_j = x_j - i y_j, i.e. theta_j decreases at rate m_j.
#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>

#include "leafwise/coiso_geometry.hpp"

namespace leafwise {

enum class PerturbationKind { builtin_bump, tabulated };

/// Compactly supported perturbation H1(t, x): identically zero outside
/// [t0, t1] x ball(center, radius).
///
/// The builtin profile is amplitude * T(t) * S(x) where both factors are the
/// smooth bump exp(1 - 1/(1 - s^2)) normalized to peak 1: S in the scaled
/// distance from the center, T in the window coordinate mapped to (-1, 1) so
/// the profile vanishes to all orders at t0 and t1.
struct Perturbation {
  PerturbationKind kind = PerturbationKind::builtin_bump;
  double amplitude = 0.0;
  PhasePoint center;
  double radius = 1.0;
  double t0 = 0.0;
  double t1 = 1.0;
  /// Tabulated profile; the stored value is amplitude * table(t, x), masked
  /// to exactly zero outside the support.
  std::function<double(double, const PhasePoint&)> table;

  double value(double t, const PhasePoint& p) const;
  /// Gradient in (x, y); analytic for the builtin bump, central differences
  /// (step 1e-6 * (1 + |coordinate|)) for tabulated profiles.
  void gradient(double t, const PhasePoint& p, Eigen::VectorXd& dx, Eigen::VectorXd& dy) const;

  bool is_zero() const { return amplitude == 0.0; }
  void validate(Eigen::Index n) const;
};

Perturbation make_builtin_bump(double amplitude, PhasePoint center, double radius, double t0,
                               double t1);

/// H0 plus a perturbation and the integrator settings.
struct PerturbedSystem {
  LevelManifold manifold;
  Perturbation perturbation;
  double step = 1e-2;
  double substep_tol = 1e-13;
  int substep_max_iter = 50;

  /// Validates the perturbation against the manifold dimension and the step
  /// resolution h <= (t1 - t0)/4 whenever the perturbation is active.
  PerturbedSystem(LevelManifold manifold_in, Perturbation perturbation_in, double step_in,
                  double substep_tol_in = 1e-13, int substep_max_iter_in = 50);
};

/// The implicit midpoint stage failed to converge within the iteration cap.
class StepConvergenceError : public std::runtime_error {
 public:
  StepConvergenceError(std::size_t step_index, double t_mid);
  std::size_t step_index() const { return step_index_; }

 private:
  std::size_t step_index_ = 0;
};

/// Exact flow of H0: block rotation theta_j -> theta_j - m_j t, r_j fixed.
PhasePoint flow_h0(const Eigen::VectorXd& masses, const PhasePoint& p, double t);

/// Flow of H0 + H1 from time `from` to `to` by Strang splitting: exact H0
/// half-steps around one implicit-midpoint step of the H1 kick with time
/// frozen at the step midpoint. Outside the support window the map reduces
/// to flow_h0 exactly.
PhasePoint flow_perturbed(const PerturbedSystem& sys, const PhasePoint& p, double from, double to);

/// Phi = phi^{-1} o psi with phi the exact H0 time-one map and psi the
/// perturbed time-one map.
PhasePoint composite_map(const PerturbedSystem& sys, const PhasePoint& p);

}  // namespace leafwise
