#pragma once

#include <optional>

#include "anisoflow/grid.hpp"
#include "anisoflow/scaling_laws.hpp"

namespace anisoflow {

/// Field in self-similar variables y_i = x_i t^{alpha_i}, w = t^beta u, tau = ln t.
/// field.time mirrors tau.
struct RescaledField {
  GridField field;
  double tau = 0.0;
};

// Default y-grid for a field at time t: the x-grid with half-widths scaled by t^{alpha_i}.
Grid selfsimilar_grid(const Grid& x_grid, double t, const ExponentSet& e);

/// w(y) = t^beta u(y_1 t^{-alpha_1}, ...), sampled on `y_grid` by multilinear
/// interpolation (exact when y_grid is selfsimilar_grid(u.grid, t, e)).
RescaledField to_selfsimilar(const GridField& u, const ExponentSet& e,
                             const std::optional<Grid>& y_grid = std::nullopt);

/// u(x) = t^{-beta} w(x_1 t^{alpha_1}, ...) on `x_grid` (default: the inverse-scaled y-grid).
GridField from_selfsimilar(const RescaledField& w, double t, const ExponentSet& e,
                           const std::optional<Grid>& x_grid = std::nullopt);

/// Discrete steady operator
///   sum_i d/dy_i [ |d_i w|^{p_i-2} d_i w - alpha_i y_i w ]
/// with central differences for the diffusion and face-wise upwinding of the
/// drift on the sign of alpha_i y_i. Outer faces carry no flux.
Eigen::ArrayXd fp_operator(const GridField& w, const ExponentSet& e);

// Largest dtau keeping the explicit update monotone, times cfl.
double fp_stable_dtau(const GridField& w, const ExponentSet& e, double cfl = 0.9,
                      double dtau_max = 1e-2);

RescaledField fp_step(const RescaledField& w, const ExponentSet& e, double dtau);

// Advances by exactly `dtau_total` using stable substeps.
RescaledField fp_advance(const RescaledField& w, const ExponentSet& e, double dtau_total,
                         double cfl = 0.9);

// L1 norm of fp_operator(w) over the mass of w; 0 for w = 0.
double steady_residual(const GridField& w, const ExponentSet& e);

struct StationaryVerdict {
  bool converged = false;
  double tau_reached = 0.0;
  double l1_rate = 0.0;         // ratio of the last two unit-tau L1 changes
  double final_residual = 0.0;
  double last_change = 0.0;     // relative L1 change over the last unit-tau window
  double residual_tolerance = 0.0;
  int windows = 0;
};

struct StationaryOptions {
  double tol = 1e-4;            // relative L1 change per unit tau
  double residual_tol = 1e-3;   // bound on steady_residual for a converged verdict
  double tau_max = 50.0;
  double cfl = 0.9;
};

/// Marches the rescaled equation in unit-tau windows until the relative L1
/// change over a window drops below tol, or tau_max is reached.
std::pair<RescaledField, StationaryVerdict> evolve_to_stationary(const RescaledField& w0,
                                                                 const ExponentSet& e,
                                                                 const StationaryOptions& options);

/// Isotropic profile for exponent p_bar on the anisotropic y-grid, coordinates
/// divided by the ratio of each half-width to the largest one, scaled to `mass_target`.
GridField warm_start(const Grid& y_grid, const ExponentSet& e, double mass_target = 1.0);

// Cosine bump of the given mass centred at the origin.
GridField bump(const Grid& grid, double radius, double mass_target);

} // namespace anisoflow
