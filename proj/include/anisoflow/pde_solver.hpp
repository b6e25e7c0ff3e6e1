#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "anisoflow/exact_solutions.hpp"
#include "anisoflow/grid.hpp"
#include "anisoflow/scaling_laws.hpp"

namespace anisoflow {

// Smooth cosine bump (1 + cos(pi |x|/radius))/2, renormalized to carry `mass`.
// radius <= 0 selects 10 max_i h_i.
struct DiracApprox {
  double mass = 1.0;
  double radius = 0.0;
};

struct BarenblattSnapshot {
  double t_start = 1.0;
};

struct SeparableSnapshot {
  SeparableParams params;
  double t_start = 0.0;
};

struct CustomDatum {
  Eigen::ArrayXd values;
  double t_start = 0.0;
};

using InitialDatum = std::variant<DiracApprox, BarenblattSnapshot, SeparableSnapshot, CustomDatum>;

struct SimConfig {
  ExponentSet e;
  Grid grid;
  InitialDatum initial = DiracApprox{};
  double t_end = 1.0;
  double cfl = 0.9;
  double dt_max = 1e-2;
  std::vector<double> output_times;  // t_end is always appended
  double support_threshold = 1e-10;  // relative to the current maximum
  double negativity_tolerance = 1e-12;
  double support_constant = 1.0;     // C in the support bound used for the domain check
};

double start_time(const SimConfig& config);

// Throws ValidationError on inconsistent input.
void validate(const SimConfig& config);

/// Per-interval step statistics.
struct StepStats {
  long steps = 0;
  double dt = 0.0;       // last step taken
  double dt_min = 0.0;
  double max_diffusivity = 0.0;
  double mass_before = 0.0;
  double mass_after = 0.0;
  double max_relative_mass_drift = 0.0;  // per step
  double min_value = 0.0;
};

GridField init_field(const SimConfig& config);

/// Fluxes |g|^{p_i-2} g, g = (u_right - u_left)/h_i, on the n_i + 1 faces of every
/// grid line along `axis` (outer faces carry zero flux). The result is laid out
/// like a grid with n_i + 1 entries along `axis`.
Eigen::ArrayXd flux(const GridField& u, const ExponentSet& e, int axis);

/// cfl * 0.5 / sum_i (D_i / h_i^2) with D_i = (p_i - 1) max |g_i|^{p_i-2};
/// dt_max when every D_i vanishes.
double stable_dt(const GridField& u, const ExponentSet& e, double cfl, double dt_max = 1e-2);

// Linearized diffusivities D_i per axis.
Eigen::VectorXd max_diffusivity(const GridField& u, const ExponentSet& e);

/// One forward-Euler step of the conservative scheme. Throws NumericalAbort on
/// non-finite values or loss of positivity beyond the tolerance.
std::pair<GridField, StepStats> step(const GridField& u, const ExponentSet& e, double dt,
                                     double negativity_tolerance = 1e-12);

// In-place variant used by run(); `out` is resized as needed.
StepStats step_into(const GridField& u, const ExponentSet& e, double dt, GridField& out,
                    double negativity_tolerance = 1e-12);

struct Snapshot {
  GridField field;
  double mass = 0.0;
  double max_value = 0.0;
  SupportBox support;
  bool near_boundary = false;
};

struct Trajectory {
  GridField initial;
  Eigen::VectorXd initial_half_width;  // R0 per axis
  std::vector<Snapshot> snapshots;
  std::vector<StepStats> log;          // one entry per output interval
  std::vector<std::string> warnings;
};

Snapshot make_snapshot(GridField field, double support_threshold = 1e-10);

/// Advances the configured datum and records a snapshot at every output time,
/// landing on each one exactly.
Trajectory run(const SimConfig& config);

// Trajectory of an analytic solution sampled on `grid`; `initial` holds the
// sample at times.front().
Trajectory sample_trajectory(const Grid& grid, const Evaluator& u, const std::vector<double>& times);

std::vector<double> geometric_times(double from, double to, int count);

} // namespace anisoflow
