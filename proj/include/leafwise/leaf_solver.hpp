/// @file leaf_solver.hpp
/// @brief Multi-start Levenberg-Marquardt search for x in N and tau with
///        Phi(x) = leaf_point(x, tau), plus the first-integral return check.
#pragma once

#include <cstdint>
#include <limits>

#include "leafwise/dynamics.hpp"

namespace leafwise {

/// Chart of N: the n plane angles plus n-k generalized spherical angles
/// parametrizing the free radii on the ellipsoid slice. Dimension n + (n-k)
/// matches dim N = 2n - k; for k = n the chart is the angles alone.
struct ChartPoint {
  Eigen::VectorXd theta;  ///< n entries
  Eigen::VectorXd phi;    ///< n - k entries
};

/// Cartesian point of the chart value; lies on N by construction.
PhasePoint embed(const LevelManifold& manifold, const ChartPoint& u);

/// Chart coordinates of an on-manifold point with positive free radii.
ChartPoint chart_from(const LevelManifold& manifold, const PhasePoint& p);

/// Leafwise defect of q against the leaf through x, in action-angle
/// coordinates: components 0..n-1 are r_j(q) - r_j(x), components n..2n-1
/// are wrap(theta_j(q) - theta_j(x) - tau_j [j <= k-1] - m_j tau_k) in
/// (-pi, pi].
Eigen::VectorXd leaf_residual(const LevelManifold& manifold, const PhasePoint& x,
                              const PhasePoint& q, const LeafParams& tau);

/// leaf_residual of the composite map image against the embedded chart point.
Eigen::VectorXd residual(const LevelManifold& manifold, const PerturbedSystem& sys,
                         const ChartPoint& u, const LeafParams& tau);

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 100;
  int n_starts = 32;
  std::uint64_t seed = 0;
};

struct SearchResult {
  PhasePoint x_star;
  LeafParams tau_star;
  double residual_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  int starts_used = 0;
  /// |G_j(psi(x*)) - c_j| for j < k and |H0(psi(x*)) - c|; meaningful only
  /// when converged.
  Eigen::VectorXd integral_return;
};

/// Multi-start damped Gauss-Newton / Levenberg-Marquardt on (u, tau) with a
/// forward-difference Jacobian (step 1e-6 * (1 + |coordinate|)). Starts are
/// drawn deterministically from the seed; the best start wins by smallest
/// residual, then smallest |tau| in the fundamental window, then start
/// index. Never throws on non-convergence: returns converged = false.
SearchResult solve(const LevelManifold& manifold, const PerturbedSystem& sys,
                   const SolveOptions& options);

/// Return defects of the first integrals after the perturbation window:
/// (|G_1(psi(x*)) - c_1|, ..., |G_{k-1}(psi(x*)) - c_{k-1}|, |H0(psi(x*)) - c|)
/// with psi = flow_perturbed over [0, 1]. Throws unless result.converged.
Eigen::VectorXd verify_return(const LevelManifold& manifold, const PerturbedSystem& sys,
                              const SearchResult& result);

}  // namespace leafwise
