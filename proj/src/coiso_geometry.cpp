#include "leafwise/coiso_geometry.hpp"

#include <Eigen/LU>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace leafwise {

namespace {

// Uniform double in [0, 1) with 53 random bits; avoids the
// implementation-defined std::uniform_real_distribution.
double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Standard normal via Box-Muller, u1 restricted to (0, 1].
double gaussian(std::mt19937_64& gen) {
  const double u1 = (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform01(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

std::string constraint_name(const LevelManifold& manifold, Eigen::Index i) {
  if (i < manifold.k() - 1) {
    return "G_" + std::to_string(i + 1) + " = c_" + std::to_string(i + 1);
  }
  return "H0 = c";
}

void require_on_manifold(const LevelManifold& manifold, const PhasePoint& p, const char* who) {
  const Eigen::VectorXd res = constraint_residuals(manifold, p);
  for (Eigen::Index i = 0; i < res.size(); ++i) {
    if (std::abs(res[i]) > 1e-8) {
      char buf[160];
      std::snprintf(buf, sizeof(buf), "%s: base point violates %s (|residual| = %.3e)", who,
                    constraint_name(manifold, i).c_str(), std::abs(res[i]));
      throw std::invalid_argument(buf);
    }
  }
}

}  // namespace

LevelManifold::LevelManifold(int n, int k, Eigen::VectorXd masses, double c,
                             Eigen::VectorXd c_sub)
    : n_(n), k_(k), m_(std::move(masses)), c_(c), c_sub_(std::move(c_sub)) {
  if (n_ < 2) {
    throw std::invalid_argument("LevelManifold: n must be >= 2");
  }
  if (k_ < 1 || k_ > n_) {
    throw std::invalid_argument("LevelManifold: k must satisfy 1 <= k <= n");
  }
  if (m_.size() != n_) {
    throw std::invalid_argument("LevelManifold: masses must have length n");
  }
  if (c_sub_.size() != k_ - 1) {
    throw std::invalid_argument("LevelManifold: c_sub must have length k - 1");
  }
  if (!m_.allFinite() || !(c_ > 0.0) || !std::isfinite(c_) || !c_sub_.allFinite()) {
    throw std::invalid_argument("LevelManifold: parameters must be finite and c > 0");
  }
  if ((m_.array() <= 0.0).any()) {
    throw std::invalid_argument("LevelManifold: all masses must be positive");
  }
  if (k_ > 1 && (c_sub_.array() <= 0.0).any()) {
    throw std::invalid_argument("LevelManifold: all sub-levels c_j must be positive");
  }
  free_level_ = c_ - 0.5 * m_.head(k_ - 1).dot(c_sub_);
  if (!(free_level_ > 0.0)) {
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "LevelManifold: admissibility violated, c - 0.5*sum(m_j*c_j) = %.6g must be > 0",
                  free_level_);
    throw std::invalid_argument(buf);
  }
}

double LevelManifold::min_free_radius() const {
  return 1e-3 * std::sqrt(2.0 * free_level_ / m_.maxCoeff());
}

double h0_energy(const Eigen::VectorXd& masses, const PhasePoint& p) {
  if (masses.size() != p.planes()) {
    throw std::invalid_argument("h0_energy: masses and point dimension mismatch");
  }
  double e = 0.0;
  for (Eigen::Index j = 0; j < masses.size(); ++j) {
    e += 0.5 * masses[j] * (p.x[j] * p.x[j] + p.y[j] * p.y[j]);
  }
  return e;
}

double plane_integral(const PhasePoint& p, Eigen::Index j) {
  if (j < 0 || j >= p.planes()) {
    throw std::invalid_argument("plane_integral: plane index out of range");
  }
  return p.x[j] * p.x[j] + p.y[j] * p.y[j];
}

Eigen::VectorXd constraint_residuals(const LevelManifold& manifold, const PhasePoint& p) {
  if (p.planes() != manifold.n()) {
    throw std::invalid_argument("constraint_residuals: point dimension mismatch");
  }
  const int k = manifold.k();
  Eigen::VectorXd res(k);
  for (int i = 0; i < k - 1; ++i) {
    res[i] = plane_integral(p, i) - manifold.c_sub()[i];
  }
  res[k - 1] = h0_energy(manifold.masses(), p) - manifold.c();
  return res;
}

PhasePoint sample_on_manifold(const LevelManifold& manifold, std::uint64_t seed) {
  const int n = manifold.n();
  const int k = manifold.k();
  const Eigen::VectorXd& m = manifold.masses();
  std::mt19937_64 gen(seed);

  Eigen::VectorXd theta(n);
  for (int j = 0; j < n; ++j) {
    theta[j] = kTwoPi * uniform01(gen);
  }

  Eigen::VectorXd r(n);
  for (int j = 0; j < k - 1; ++j) {
    r[j] = std::sqrt(manifold.c_sub()[j]);
  }

  const int free = n - k + 1;
  const double rmin = manifold.min_free_radius();
  Eigen::VectorXd scale(free);   // full radius of plane j on the ellipsoid
  Eigen::VectorXd floor_d(free);  // direction floor implied by rmin
  for (int j = 0; j < free; ++j) {
    scale[j] = std::sqrt(2.0 * manifold.free_level() / m[k - 1 + j]);
    floor_d[j] = rmin / scale[j];
  }

  Eigen::VectorXd d(free);
  bool ok = false;
  for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
    for (int j = 0; j < free; ++j) {
      d[j] = std::abs(gaussian(gen));
    }
    const double norm = d.norm();
    if (norm == 0.0) continue;
    d /= norm;
    ok = ((d.array() * scale.array()) >= rmin).all();
  }
  if (!ok) {
    // Essentially unreachable; clamp with a margin and renormalize.
    d = d.cwiseMax(2.0 * floor_d);
    d /= d.norm();
  }
  for (int j = 0; j < free; ++j) {
    r[k - 1 + j] = d[j] * scale[j];
  }
  return from_action_angle(ActionAngle(std::move(r), std::move(theta)));
}

PhasePoint leaf_point(const LevelManifold& manifold, const PhasePoint& base,
                      const LeafParams& tau) {
  const int k = manifold.k();
  if (tau.tau.size() != k || !tau.tau.allFinite()) {
    throw std::invalid_argument("leaf_point: tau must have k finite entries");
  }
  require_on_manifold(manifold, base, "leaf_point");

  ActionAngle aa = to_action_angle(base);
  const double tk = tau.tau[k - 1];
  for (int j = 0; j < manifold.n(); ++j) {
    double shift = manifold.masses()[j] * tk;
    if (j < k - 1) shift += tau.tau[j];
    aa.theta[j] = wrap_angle_2pi(aa.theta[j] + shift);
  }
  return from_action_angle(aa);
}

std::optional<LeafParams> leaf_membership(const LevelManifold& manifold, const PhasePoint& base,
                                          const PhasePoint& q, double tol,
                                          double window_factor) {
  require_on_manifold(manifold, base, "leaf_membership");
  if (q.planes() != manifold.n()) {
    throw std::invalid_argument("leaf_membership: point dimension mismatch");
  }

  const int n = manifold.n();
  const int k = manifold.k();
  const Eigen::VectorXd& m = manifold.masses();
  const ActionAngle ab = to_action_angle(base);
  const ActionAngle aq = to_action_angle(q);

  double radial_sq = 0.0;
  for (int j = 0; j < n; ++j) {
    const double dr = aq.r[j] - ab.r[j];
    radial_sq += dr * dr;
  }

  Eigen::VectorXd dtheta(n);
  for (int j = 0; j < n; ++j) {
    dtheta[j] = aq.theta[j] - ab.theta[j];
  }

  // For l < k the shift tau_l absorbs the angle defect of plane l exactly,
  // so only the free planes constrain tau_k.
  const double max_m = m.maxCoeff();
  auto angle_cost = [&](double tk) {
    double s = 0.0;
    for (int j = k - 1; j < n; ++j) {
      const double w = wrap_angle_pi(dtheta[j] - m[j] * tk);
      s += w * w;
    }
    return s;
  };

  double denom = 0.0;
  for (int j = k - 1; j < n; ++j) denom += m[j] * m[j];
  auto polish = [&](double t0) {
    double t = t0;
    for (int it = 0; it < 60; ++it) {
      double num = 0.0;
      for (int j = k - 1; j < n; ++j) {
        num += m[j] * wrap_angle_pi(dtheta[j] - m[j] * t);
      }
      const double delta = num / denom;
      t += delta;
      if (std::abs(delta) * max_m < 1e-15) break;
    }
    return t;
  };

  // Scan the fundamental window, then polish every local minimum of the
  // sampled cost: with incommensurate masses a near-recurrence basin can
  // undercut the sampled cost of the true basin, so polishing only the
  // global grid minimum is not reliable.
  const double window = kTwoPi * window_factor / m.minCoeff();
  const double step = (kPi / 16.0) / max_m;
  const int npts = static_cast<int>(std::ceil(window / step)) + 1;
  std::vector<double> cost(static_cast<std::size_t>(npts));
  for (int i = 0; i < npts; ++i) {
    const double t = window * static_cast<double>(i) / static_cast<double>(npts - 1);
    cost[static_cast<std::size_t>(i)] = angle_cost(t);
  }
  double tk = 0.0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int i = 0; i < npts; ++i) {
    const bool local_min = (i == 0 || cost[i] <= cost[i - 1]) &&
                           (i == npts - 1 || cost[i] <= cost[i + 1]);
    if (!local_min) continue;
    const double t = polish(window * static_cast<double>(i) / static_cast<double>(npts - 1));
    const double c = angle_cost(t);
    if (c < best_cost) {
      best_cost = c;
      tk = t;
    }
  }

  const double residual = std::sqrt(radial_sq + angle_cost(tk));
  if (!(residual < tol)) {
    return std::nullopt;
  }

  Eigen::VectorXd tau(k);
  for (int l = 0; l < k - 1; ++l) {
    tau[l] = wrap_angle_2pi(dtheta[l] - m[l] * tk);
  }
  tau[k - 1] = tk;
  return LeafParams{std::move(tau)};
}

Eigen::MatrixXd contact_matrix(const LevelManifold& manifold) {
  const int k = manifold.k();
  const double c = manifold.c();
  Eigen::MatrixXd a(k, k);
  a(0, 0) = c;
  for (int j = 1; j < k; ++j) {
    a(0, j) = c + manifold.masses()[j - 1];
  }
  for (int i = 1; i < k; ++i) {
    const double half_ci = 0.5 * manifold.c_sub()[i - 1];
    a(i, 0) = half_ci;
    for (int j = 1; j < k; ++j) {
      a(i, j) = half_ci + (i == j ? 1.0 : 0.0);
    }
  }
  return a;
}

ContactCheck verify_k_contact(const LevelManifold& manifold) {
  ContactCheck check;
  check.det = contact_matrix(manifold).determinant();
  check.analytic = manifold.free_level();
  const double scale = std::max(1.0, std::abs(check.analytic));
  check.pass = std::abs(check.det - check.analytic) <= 1e-9 * scale && check.analytic > 0.0;
  return check;
}

}  // namespace leafwise
