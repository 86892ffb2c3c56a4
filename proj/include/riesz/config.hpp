#pragma once

namespace riesz {

// Controls for the radial quadrature: working log-grid extent and density,
// target relative error, and the near-diagonal refinement policy.
struct QuadratureConfig {
  double rel_tol = 1e-7;
  double r_min = 1e-6;
  double r_max = 1e6;
  int points_per_decade = 64;
  // Half-width (in log-radius units) of the band around s = r handled by
  // geometric panel refinement; 0 means "the two panels adjacent to r".
  double singular_split_width = 0.0;
};

// Controls for the angular (spherical) kernel quadrature.
struct AngularKernelConfig {
  double theta_rel_tol = 1e-9;
  int max_panels = 240;
  double near_diagonal_band = 0.05;
};

}  // namespace riesz
