#include "leafwise/capacity.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <vector>

namespace leafwise {

std::pair<double, double> grid_extrema(const std::function<double(double, const PhasePoint&)>& f,
                                       const PhasePoint& box_center, double box_half_width,
                                       const GridSpec& grid) {
  if (grid.time_samples < 2 || grid.samples_per_axis < 2) {
    throw std::invalid_argument("grid_extrema: need at least 2 points per axis");
  }
  if (!(box_half_width > 0.0)) {
    throw std::invalid_argument("grid_extrema: box half width must be positive");
  }
  const Eigen::Index n = box_center.planes();
  const Eigen::Index axes = 2 * n;
  const Eigen::VectorXd center = to_interleaved(box_center);
  const int s = grid.samples_per_axis;

  std::vector<int> idx(static_cast<std::size_t>(axes), 0);
  Eigen::VectorXd coords(axes);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int ti = 0; ti < grid.time_samples; ++ti) {
    const double t = static_cast<double>(ti) / static_cast<double>(grid.time_samples - 1);
    std::fill(idx.begin(), idx.end(), 0);
    bool done = false;
    while (!done) {
      for (Eigen::Index a = 0; a < axes; ++a) {
        const double frac = static_cast<double>(idx[static_cast<std::size_t>(a)]) /
                            static_cast<double>(s - 1);
        coords[a] = center[a] - box_half_width + 2.0 * box_half_width * frac;
      }
      const double v = f(t, from_interleaved(coords));
      if (v < lo) lo = v;
      if (v > hi) hi = v;
      // odometer
      Eigen::Index a = 0;
      while (a < axes) {
        if (++idx[static_cast<std::size_t>(a)] < s) break;
        idx[static_cast<std::size_t>(a)] = 0;
        ++a;
      }
      done = (a == axes);
    }
  }
  return {hi, lo};
}

NormEstimate hofer_norm(const Perturbation& h1, const GridSpec& grid) {
  if (grid.time_samples < 2 || grid.samples_per_axis < 2) {
    throw std::invalid_argument("hofer_norm: need at least 2 points per axis");
  }
  NormEstimate est;
  if (h1.is_zero()) {
    est.grid = "analytic (zero perturbation)";
    return est;
  }
  if (h1.kind == PerturbationKind::builtin_bump) {
    // The bump attains amplitude at the window midpoint over the center and
    // vanishes off its support.
    est.sup = std::max(h1.amplitude, 0.0);
    est.inf = std::min(h1.amplitude, 0.0);
    est.norm = est.sup - est.inf;
    est.grid = "analytic (builtin bump extrema)";
    return est;
  }
  auto value = [&h1](double t, const PhasePoint& p) { return h1.value(t, p); };
  const auto [hi, lo] = grid_extrema(value, h1.center, h1.radius, grid);
  est.sup = std::max(hi, 0.0);
  est.inf = std::min(lo, 0.0);
  est.norm = est.sup - est.inf;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "t:%d s:%d^%d", grid.time_samples, grid.samples_per_axis,
                static_cast<int>(2 * h1.center.planes()));
  est.grid = buf;
  return est;
}

Eigen::VectorXd equivalent_radii(const LevelManifold& manifold) {
  const int n = manifold.n();
  const int k = manifold.k();
  Eigen::VectorXd r(n);
  for (int p = 0; p < k - 1; ++p) {
    r[p] = std::sqrt(manifold.c_sub()[p]);
  }
  for (int p = k - 1; p < n; ++p) {
    r[p] = std::sqrt(2.0 * manifold.free_level() / manifold.masses()[p]);
  }
  return r;
}

double capacity_fh(const LevelManifold& manifold) {
  const Eigen::VectorXd r = equivalent_radii(manifold);
  double min_sq = std::numeric_limits<double>::infinity();
  for (Eigen::Index p = 0; p < r.size(); ++p) {
    min_sq = std::min(min_sq, r[p] * r[p]);
  }
  return kPi * min_sq;
}

double threshold_min_formula(const LevelManifold& manifold) {
  const int n = manifold.n();
  const int k = manifold.k();
  double best = std::numeric_limits<double>::infinity();
  for (int p = 0; p < k - 1; ++p) {
    best = std::min(best, kPi * manifold.c_sub()[p]);
  }
  const double numer = 2.0 * manifold.c() - manifold.masses().head(k - 1).dot(manifold.c_sub());
  for (int p = k - 1; p < n; ++p) {
    best = std::min(best, kPi * numer / manifold.masses()[p]);
  }
  return best;
}

double capacity_reference(ReferenceShape shape, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("capacity_reference: radius must be positive");
  }
  switch (shape) {
    case ReferenceShape::ball:
    case ReferenceShape::cylinder:
      return kPi * radius * radius;
  }
  throw std::invalid_argument("capacity_reference: unknown reference shape");
}

}  // namespace leafwise
