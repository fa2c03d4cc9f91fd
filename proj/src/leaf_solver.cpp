#include "leafwise/leaf_solver.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace leafwise {

namespace {

// Free radii implied by the spherical angles; r may carry a sign when phi
// leaves the positive orthant, which the Cartesian reconstruction absorbs
// into the angle. |r| is what the r_min guard inspects.
Eigen::VectorXd free_radii(const LevelManifold& manifold, const Eigen::VectorXd& phi) {
  const int k = manifold.k();
  const int free = manifold.n() - k + 1;
  Eigen::VectorXd d(free);
  double prod = 1.0;
  for (int i = 0; i < free - 1; ++i) {
    d[i] = prod * std::cos(phi[i]);
    prod *= std::sin(phi[i]);
  }
  d[free - 1] = prod;
  Eigen::VectorXd r(free);
  for (int i = 0; i < free; ++i) {
    r[i] = d[i] * std::sqrt(2.0 * manifold.free_level() / manifold.masses()[k - 1 + i]);
  }
  return r;
}

}  // namespace

PhasePoint embed(const LevelManifold& manifold, const ChartPoint& u) {
  const int n = manifold.n();
  const int k = manifold.k();
  if (u.theta.size() != n || u.phi.size() != n - k) {
    throw std::invalid_argument("embed: chart point has wrong dimensions");
  }
  Eigen::VectorXd r(n);
  for (int j = 0; j < k - 1; ++j) {
    r[j] = std::sqrt(manifold.c_sub()[j]);
  }
  r.tail(n - k + 1) = free_radii(manifold, u.phi);
  Eigen::VectorXd x(n), y(n);
  for (int j = 0; j < n; ++j) {
    x[j] = r[j] * std::cos(u.theta[j]);
    y[j] = -r[j] * std::sin(u.theta[j]);
  }
  return PhasePoint(std::move(x), std::move(y));
}

ChartPoint chart_from(const LevelManifold& manifold, const PhasePoint& p) {
  const int n = manifold.n();
  const int k = manifold.k();
  if (p.planes() != n) {
    throw std::invalid_argument("chart_from: point dimension mismatch");
  }
  const ActionAngle aa = to_action_angle(p);
  ChartPoint u;
  u.theta = aa.theta;

  const int free = n - k + 1;
  Eigen::VectorXd d(free);
  for (int i = 0; i < free; ++i) {
    d[i] = aa.r[k - 1 + i] / std::sqrt(2.0 * manifold.free_level() / manifold.masses()[k - 1 + i]);
  }
  d /= d.norm();
  u.phi.resize(n - k);
  double tail_sq = d.squaredNorm();
  for (int i = 0; i < free - 1; ++i) {
    tail_sq = std::max(tail_sq - d[i] * d[i], 0.0);
    u.phi[i] = std::atan2(std::sqrt(tail_sq), d[i]);
  }
  return u;
}

Eigen::VectorXd leaf_residual(const LevelManifold& manifold, const PhasePoint& x,
                              const PhasePoint& q, const LeafParams& tau) {
  const int n = manifold.n();
  const int k = manifold.k();
  if (x.planes() != n || q.planes() != n) {
    throw std::invalid_argument("leaf_residual: point dimension mismatch");
  }
  if (tau.tau.size() != k) {
    throw std::invalid_argument("leaf_residual: tau must have k entries");
  }
  const ActionAngle ax = to_action_angle(x);
  const ActionAngle aq = to_action_angle(q);
  const double tk = tau.tau[k - 1];
  Eigen::VectorXd f(2 * n);
  for (int j = 0; j < n; ++j) {
    f[j] = aq.r[j] - ax.r[j];
    double shift = manifold.masses()[j] * tk;
    if (j < k - 1) shift += tau.tau[j];
    f[n + j] = wrap_angle_pi(aq.theta[j] - ax.theta[j] - shift);
  }
  return f;
}

Eigen::VectorXd residual(const LevelManifold& manifold, const PerturbedSystem& sys,
                         const ChartPoint& u, const LeafParams& tau) {
  const PhasePoint x = embed(manifold, u);
  return leaf_residual(manifold, x, composite_map(sys, x), tau);
}

namespace {

// Unknown vector layout: theta (n), phi (n - k), tau (k).
ChartPoint unpack_chart(const LevelManifold& manifold, const Eigen::VectorXd& v) {
  const int n = manifold.n();
  const int k = manifold.k();
  ChartPoint u;
  u.theta = v.head(n);
  u.phi = v.segment(n, n - k);
  return u;
}

LeafParams unpack_tau(const LevelManifold& manifold, const Eigen::VectorXd& v) {
  return LeafParams{v.tail(manifold.k())};
}

// Residual evaluation usable inside LM: iterates that cross the chart guard
// or break the implicit stage are rejected rather than thrown.
std::optional<Eigen::VectorXd> try_residual(const LevelManifold& manifold,
                                            const PerturbedSystem& sys,
                                            const Eigen::VectorXd& v) {
  const ChartPoint u = unpack_chart(manifold, v);
  const Eigen::VectorXd r = free_radii(manifold, u.phi);
  if ((r.cwiseAbs().array() < manifold.min_free_radius()).any()) {
    return std::nullopt;
  }
  try {
    return residual(manifold, sys, u, unpack_tau(manifold, v));
  } catch (const StepConvergenceError&) {
    return std::nullopt;
  }
}

// Forward-difference Jacobian; angle rows are differenced through the wrap
// so seam crossings do not poison the columns.
std::optional<Eigen::MatrixXd> fd_jacobian(const LevelManifold& manifold,
                                           const PerturbedSystem& sys, const Eigen::VectorXd& v,
                                           const Eigen::VectorXd& f0) {
  const Eigen::Index dim = v.size();
  const Eigen::Index n = manifold.n();
  Eigen::MatrixXd jac(dim, dim);
  Eigen::VectorXd probe = v;
  for (Eigen::Index i = 0; i < dim; ++i) {
    double eps = 1e-6 * (1.0 + std::abs(v[i]));
    probe[i] = v[i] + eps;
    auto fi = try_residual(manifold, sys, probe);
    if (!fi) {
      eps = -eps;
      probe[i] = v[i] + eps;
      fi = try_residual(manifold, sys, probe);
      if (!fi) return std::nullopt;
    }
    probe[i] = v[i];
    for (Eigen::Index row = 0; row < dim; ++row) {
      const double diff =
          (row < n) ? (*fi)[row] - f0[row] : wrap_angle_pi((*fi)[row] - f0[row]);
      jac(row, i) = diff / eps;
    }
  }
  return jac;
}

// Rough fit of the leaf shift to the measured angle defects: scan tau_k over
// the fundamental window, absorb the pinned planes, then let LM polish.
Eigen::VectorXd initial_tau(const LevelManifold& manifold, const Eigen::VectorXd& dtheta) {
  const int n = manifold.n();
  const int k = manifold.k();
  const Eigen::VectorXd& m = manifold.masses();
  auto cost = [&](double tk) {
    double s = 0.0;
    for (int j = k - 1; j < n; ++j) {
      const double w = wrap_angle_pi(dtheta[j] - m[j] * tk);
      s += w * w;
    }
    return s;
  };
  const double window = kTwoPi * 4.0 / m.minCoeff();
  const double step = (kPi / 16.0) / m.maxCoeff();
  const int npts = static_cast<int>(std::ceil(window / step)) + 1;
  double best_t = 0.0;
  double best = cost(0.0);
  for (int i = 1; i < npts; ++i) {
    const double t = window * static_cast<double>(i) / static_cast<double>(npts - 1);
    const double ci = cost(t);
    if (ci < best) {
      best = ci;
      best_t = t;
    }
  }
  double denom = 0.0;
  for (int j = k - 1; j < n; ++j) denom += m[j] * m[j];
  for (int it = 0; it < 40; ++it) {
    double num = 0.0;
    for (int j = k - 1; j < n; ++j) {
      num += m[j] * wrap_angle_pi(dtheta[j] - m[j] * best_t);
    }
    const double delta = num / denom;
    best_t += delta;
    if (std::abs(delta) * m.maxCoeff() < 1e-14) break;
  }
  Eigen::VectorXd tau(k);
  for (int l = 0; l < k - 1; ++l) {
    tau[l] = wrap_angle_pi(dtheta[l] - m[l] * best_t);
  }
  tau[k - 1] = best_t;
  return tau;
}

Eigen::VectorXd wrapped_tau(const LevelManifold& manifold, const Eigen::VectorXd& tau) {
  const int k = manifold.k();
  Eigen::VectorXd out = tau;
  for (int l = 0; l < k - 1; ++l) {
    out[l] = wrap_angle_pi(tau[l]);
  }
  bool integer_masses = true;
  for (Eigen::Index j = 0; j < manifold.masses().size(); ++j) {
    const double mj = manifold.masses()[j];
    if (std::abs(mj - std::round(mj)) > 1e-12) {
      integer_masses = false;
      break;
    }
  }
  // tau_k is 2pi-periodic only when every m_j is an integer.
  if (integer_masses) {
    out[k - 1] = wrap_angle_pi(tau[k - 1]);
  }
  return out;
}

struct StartOutcome {
  bool converged = false;
  double residual_norm = std::numeric_limits<double>::infinity();
  int iterations = 0;
  Eigen::VectorXd v;
  double tau_magnitude = std::numeric_limits<double>::infinity();
};

StartOutcome run_start(const LevelManifold& manifold, const PerturbedSystem& sys,
                       const SolveOptions& options, std::uint64_t start_seed) {
  StartOutcome out;
  const int n = manifold.n();
  const int k = manifold.k();

  const PhasePoint x0 = sample_on_manifold(manifold, start_seed);
  Eigen::VectorXd v(2 * n);
  {
    const ChartPoint u0 = chart_from(manifold, x0);
    v.head(n) = u0.theta;
    v.segment(n, n - k) = u0.phi;
    PhasePoint q0;
    try {
      q0 = composite_map(sys, x0);
    } catch (const StepConvergenceError&) {
      return out;
    }
    const ActionAngle a0 = to_action_angle(x0);
    const ActionAngle aq0 = to_action_angle(q0);
    Eigen::VectorXd dtheta(n);
    for (int j = 0; j < n; ++j) {
      dtheta[j] = aq0.theta[j] - a0.theta[j];
    }
    v.tail(k) = initial_tau(manifold, dtheta);
  }

  auto f_opt = try_residual(manifold, sys, v);
  if (!f_opt) {
    return out;
  }
  Eigen::VectorXd f = *f_opt;
  double fnorm = f.norm();
  double lambda = 1e-3;

  int iter = 0;
  while (iter < options.max_iter && fnorm > options.tol) {
    const auto jac = fd_jacobian(manifold, sys, v, f);
    if (!jac) break;
    const Eigen::MatrixXd jtj = jac->transpose() * (*jac);
    const Eigen::VectorXd jtf = jac->transpose() * f;
    const Eigen::VectorXd damping = jtj.diagonal().cwiseMax(1e-10);

    bool accepted = false;
    double step_scale = 0.0;
    while (lambda <= 1e14) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * damping;
      const Eigen::VectorXd delta = a.ldlt().solve(-jtf);
      if (delta.allFinite()) {
        const Eigen::VectorXd trial = v + delta;
        const auto ft = try_residual(manifold, sys, trial);
        if (ft && ft->norm() < fnorm) {
          v = trial;
          f = *ft;
          fnorm = f.norm();
          lambda = std::max(lambda / 3.0, 1e-12);
          step_scale = delta.cwiseAbs().maxCoeff();
          accepted = true;
          break;
        }
      }
      lambda *= 10.0;
    }
    ++iter;
    if (!accepted) break;
    if (step_scale < 1e-15 * (1.0 + v.cwiseAbs().maxCoeff())) break;
  }

  out.converged = fnorm <= options.tol;
  out.residual_norm = fnorm;
  out.iterations = iter;
  out.v = v;
  out.tau_magnitude = wrapped_tau(manifold, v.tail(k)).norm();
  return out;
}

}  // namespace

SearchResult solve(const LevelManifold& manifold, const PerturbedSystem& sys,
                   const SolveOptions& options) {
  if (options.n_starts < 1 || options.max_iter < 0 || !(options.tol > 0.0)) {
    throw std::invalid_argument("solve: invalid options");
  }

  std::mt19937_64 seeder(options.seed);
  std::vector<std::uint64_t> start_seeds(static_cast<std::size_t>(options.n_starts));
  for (auto& s : start_seeds) s = seeder();

  // Starts are independent; the reduction is ordered by start index so the
  // outcome cannot depend on scheduling.
  std::optional<StartOutcome> best;
  for (int s = 0; s < options.n_starts; ++s) {
    StartOutcome outcome =
        run_start(manifold, sys, options, start_seeds[static_cast<std::size_t>(s)]);
    const bool better =
        !best || (outcome.converged && !best->converged) ||
        (outcome.converged == best->converged &&
         (outcome.residual_norm < best->residual_norm ||
          (outcome.residual_norm == best->residual_norm &&
           outcome.tau_magnitude < best->tau_magnitude)));
    if (better) best = std::move(outcome);
  }

  SearchResult result;
  result.starts_used = options.n_starts;
  result.iterations = best->iterations;
  result.residual_norm = best->residual_norm;
  result.converged = best->converged;
  if (best->v.size() > 0) {
    result.x_star = embed(manifold, unpack_chart(manifold, best->v));
    result.tau_star = LeafParams{wrapped_tau(manifold, best->v.tail(manifold.k()))};
  } else {
    result.x_star = sample_on_manifold(manifold, options.seed);
    result.tau_star = LeafParams{Eigen::VectorXd::Zero(manifold.k())};
    result.converged = false;
  }
  if (result.converged) {
    result.integral_return = verify_return(manifold, sys, result);
  }
  return result;
}

Eigen::VectorXd verify_return(const LevelManifold& manifold, const PerturbedSystem& sys,
                              const SearchResult& result) {
  if (!result.converged) {
    throw std::invalid_argument("verify_return: requires a converged result");
  }
  const PhasePoint psi = flow_perturbed(sys, result.x_star, 0.0, 1.0);
  const int k = manifold.k();
  Eigen::VectorXd defects(k);
  for (int j = 0; j < k - 1; ++j) {
    defects[j] = std::abs(plane_integral(psi, j) - manifold.c_sub()[j]);
  }
  defects[k - 1] = std::abs(h0_energy(manifold.masses(), psi) - manifold.c());
  return defects;
}

}  // namespace leafwise
