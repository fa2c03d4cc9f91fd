/// @file capacity.hpp
/// @brief Hofer norms of perturbations and the capacity threshold of the
///        oscillator level manifold.
#pragma once

#include <string>
#include <utility>

#include "leafwise/dynamics.hpp"

namespace leafwise {

struct GridSpec {
  int time_samples = 64;
  int samples_per_axis = 32;
};

/// sup/inf bracketing of a perturbation; norm = sup - inf exactly.
struct NormEstimate {
  double sup = 0.0;
  double inf = 0.0;
  double norm = 0.0;
  std::string grid;  ///< sampling description
};

/// Raw extrema of f over the uniform grid [0,1] x box(center, half_width)^{2n}
/// (endpoints included, no support masking). Throws unless the grid has at
/// least 2 points per axis. Cost is time_samples * samples_per_axis^{2n}.
std::pair<double, double> grid_extrema(const std::function<double(double, const PhasePoint&)>& f,
                                       const PhasePoint& box_center, double box_half_width,
                                       const GridSpec& grid);

/// ||H1|| = sup H1 - inf H1. The builtin bump family uses its analytic
/// extrema (amplitude and 0); tabulated profiles are sampled over
/// [0,1] x (support box), with 0 joined to the sample set since H1 vanishes
/// off its support.
NormEstimate hofer_norm(const Perturbation& h1, const GridSpec& grid = {});

/// Radii of the normal-form manifold { |z_1| = r_1, ..., |z_{k-1}| = r_{k-1},
/// sum_{j>=k} |z_j|^2 / r_j^2 = 1 } carrying N: r_p^2 = c_p for p < k and
/// r_p^2 = (2c - sum m_j c_j)/m_p for p >= k.
Eigen::VectorXd equivalent_radii(const LevelManifold& manifold);

/// pi * min_p r_p^2, computed through equivalent_radii.
double capacity_fh(const LevelManifold& manifold);

/// The same threshold evaluated directly as
/// min{ min_{p<k} pi c_p, min_{p>=k} pi (2c - sum m_j c_j)/m_p };
/// an independent route kept for cross-checking capacity_fh.
double threshold_min_formula(const LevelManifold& manifold);

enum class ReferenceShape { ball, cylinder };

/// Capacity of the normalization shapes: pi R^2 for ball(R) and cylinder(R).
double capacity_reference(ReferenceShape shape, double radius);

}  // namespace leafwise
