/// @file coiso_geometry.hpp
/// @brief The oscillator level manifold {H0 = c, G_j = c_j}, its leaf
///        foliation and the k-contact certification matrix.
#pragma once

#include <cstdint>
#include <optional>

#include "leafwise/phase_space.hpp"

namespace leafwise {

/// Level manifold N of n independent oscillators with frequencies m_j:
/// the first k-1 plane integrals G_j = x_j^2 + y_j^2 are pinned to c_j and
/// the total energy H0 = 1/2 sum m_j G_j to c.
///
/// Admissibility c - 1/2 sum_{j<k} m_j c_j > 0 is enforced at construction;
/// it is exactly the condition that the free-radius ellipsoid is nonempty.
class LevelManifold {
 public:
  LevelManifold(int n, int k, Eigen::VectorXd masses, double c, Eigen::VectorXd c_sub);

  int n() const { return n_; }
  int k() const { return k_; }
  const Eigen::VectorXd& masses() const { return m_; }
  double c() const { return c_; }
  const Eigen::VectorXd& c_sub() const { return c_sub_; }

  /// c' = c - 1/2 sum_{j<k} m_j c_j, the level of the free ellipsoid
  /// 1/2 sum_{j>=k} m_j r_j^2 = c'.
  double free_level() const { return free_level_; }

  /// Chart guard: free radii are kept >= 1e-3 * sqrt(2 c' / max_j m_j),
  /// away from the polar-coordinate singularity at r = 0.
  double min_free_radius() const;

 private:
  int n_ = 0;
  int k_ = 0;
  Eigen::VectorXd m_;
  double c_ = 0.0;
  Eigen::VectorXd c_sub_;
  double free_level_ = 0.0;
};

/// The k leaf parameters (tau_1, ..., tau_k).
struct LeafParams {
  Eigen::VectorXd tau;
};

/// H0 = 1/2 sum_j m_j (x_j^2 + y_j^2).
double h0_energy(const Eigen::VectorXd& masses, const PhasePoint& p);

/// G_j = x_j^2 + y_j^2 for plane index j (0-based).
double plane_integral(const PhasePoint& p, Eigen::Index j);

/// (G_1 - c_1, ..., G_{k-1} - c_{k-1}, H0 - c).
Eigen::VectorXd constraint_residuals(const LevelManifold& manifold, const PhasePoint& p);

/// Deterministic-in-seed point of N: uniform angles, free radii drawn from
/// the positive ellipsoid orthant with every r_j >= min_free_radius().
PhasePoint sample_on_manifold(const LevelManifold& manifold, std::uint64_t seed);

/// The point of the leaf through `base` with parameters tau:
/// r_j fixed, theta_j += tau_j (j <= k-1) and theta_j += m_j tau_k (all j).
/// Throws std::invalid_argument naming the violated constraint when `base`
/// is off N by more than 1e-8.
PhasePoint leaf_point(const LevelManifold& manifold, const PhasePoint& base, const LeafParams& tau);

/// Search the leaf through `base` for q. Returns the minimizing tau if the
/// angle-wrapped residual falls below tol, otherwise an empty optional.
/// tau_l lies in [0, 2pi) for l < k; tau_k is located by a grid scan over
/// [0, 2pi * window_factor / min_j m_j] followed by a Gauss-Newton polish.
std::optional<LeafParams> leaf_membership(const LevelManifold& manifold, const PhasePoint& base,
                                          const PhasePoint& q, double tol,
                                          double window_factor = 4.0);

/// The k x k matrix A pairing the contact one-forms with the kernel fields
/// of omega restricted to N.
Eigen::MatrixXd contact_matrix(const LevelManifold& manifold);

struct ContactCheck {
  double det = 0.0;       ///< numeric determinant of contact_matrix
  double analytic = 0.0;  ///< c - 1/2 sum_{j<k} m_j c_j
  bool pass = false;
};

/// Certify the k-contact condition: det A must equal c - 1/2 sum m_j c_j
/// (relative 1e-9) and be positive.
ContactCheck verify_k_contact(const LevelManifold& manifold);

}  // namespace leafwise
