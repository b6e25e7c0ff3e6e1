#include "anisoflow/pde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "anisoflow/errors.hpp"

namespace anisoflow {

namespace {

// |g|^{p-2} g with exact integer powers for the common p = 3, 4.
struct FluxLaw {
  double exponent;  // p - 2

  double operator()(double g) const {
    if (exponent == 1.0) return std::abs(g) * g;
    if (exponent == 2.0) return g * g * g;
    if (g == 0.0) return 0.0;
    return std::pow(std::abs(g), exponent) * g;
  }
};

// Calls fn(first_index) for the first node of every grid line along `axis`.
template <typename Fn>
void for_each_line(const Grid& grid, int axis, Fn&& fn) {
  const Eigen::Index s = grid.stride(axis);
  const Eigen::Index block = s * grid.nodes()[axis];
  for (Eigen::Index outer = 0; outer < grid.size(); outer += block) {
    for (Eigen::Index inner = 0; inner < s; ++inner) fn(outer + inner);
  }
}

double max_abs_gradient(const GridField& u, int axis) {
  const Grid& grid = u.grid;
  const Eigen::Index s = grid.stride(axis);
  const int n = grid.nodes()[axis];
  const double* v = u.values.data();
  double gmax = 0.0;
  for_each_line(grid, axis, [&](Eigen::Index start) {
    for (int k = 0; k + 1 < n; ++k) {
      const Eigen::Index a = start + k * s;
      gmax = std::max(gmax, std::abs(v[a + s] - v[a]));
    }
  });
  return gmax / grid.spacing(axis);
}

Eigen::VectorXd initial_half_width(const SimConfig& config, const GridField& field) {
  if (const auto* dirac = std::get_if<DiracApprox>(&config.initial)) {
    const double radius = dirac->radius > 0.0 ? dirac->radius : 10.0 * config.grid.spacings().maxCoeff();
    return Eigen::VectorXd::Constant(config.grid.dim(), radius);
  }
  return support_box_relative(field, config.support_threshold).half_width;
}

} // namespace

double start_time(const SimConfig& config) {
  return std::visit(
      [](const auto& datum) -> double {
        using T = std::decay_t<decltype(datum)>;
        if constexpr (std::is_same_v<T, DiracApprox>) {
          return 0.0;
        } else {
          return datum.t_start;
        }
      },
      config.initial);
}

void validate(const SimConfig& config) {
  if (config.grid.dim() != config.e.N) throw ValidationError("grid dimension does not match the exponents");
  if (!(config.cfl > 0.0 && config.cfl < 1.0)) throw ValidationError("cfl must lie in (0, 1)");
  if (!(config.dt_max > 0.0)) throw ValidationError("dt_max must be positive");
  if (!(config.t_end > 0.0)) throw ValidationError("t_end must be positive");
  if (!(config.t_end > start_time(config))) throw ValidationError("t_end must exceed the start time");
  if (std::holds_alternative<BarenblattSnapshot>(config.initial)) {
    config.e.p_iso();
    if (!(std::get<BarenblattSnapshot>(config.initial).t_start > 0.0)) {
      throw ValidationError("Barenblatt snapshot needs t_start > 0");
    }
  }
  if (const auto* sep = std::get_if<SeparableSnapshot>(&config.initial)) {
    if (config.t_end >= sep->params.T_blowup.minCoeff()) {
      throw ValidationError("separable datum blows up before t_end");
    }
  }
}

GridField init_field(const SimConfig& config) {
  validate(config);
  const Grid& grid = config.grid;
  const double t0 = start_time(config);
  return std::visit(
      [&](const auto& datum) -> GridField {
        using T = std::decay_t<decltype(datum)>;
        if constexpr (std::is_same_v<T, DiracApprox>) {
          const double hmax = grid.spacings().maxCoeff();
          const double radius = datum.radius > 0.0 ? datum.radius : 10.0 * hmax;
          if (radius < 2.0 * hmax) throw ValidationError("Dirac radius is below 2 grid spacings");
          if (!(datum.mass > 0.0)) throw ValidationError("Dirac mass must be positive");
          GridField f(grid, t0);
          for (Eigen::Index k = 0; k < grid.size(); ++k) {
            const double r = grid.point(k).norm();
            if (r < radius) f.values[k] = 0.5 * (1.0 + std::cos(std::numbers::pi * r / radius));
          }
          const double m = mass(f);
          if (!(m > 0.0)) throw ValidationError("Dirac bump is not resolved by the grid");
          f.values *= datum.mass / m;
          return f;
        } else if constexpr (std::is_same_v<T, BarenblattSnapshot>) {
          return sample(grid, barenblatt_evaluator(config.e), t0);
        } else if constexpr (std::is_same_v<T, SeparableSnapshot>) {
          const SeparableParams params = datum.params;
          return sample(grid, [params](const Eigen::VectorXd& x, double t) { return separable_solution(params, x, t); }, t0);
        } else {
          return GridField(grid, datum.values, t0);
        }
      },
      config.initial);
}

Eigen::ArrayXd flux(const GridField& u, const ExponentSet& e, int axis) {
  const Grid& grid = u.grid;
  if (axis < 0 || axis >= grid.dim()) throw ValidationError("axis out of range");
  const int n = grid.nodes()[axis];
  const Eigen::Index s = grid.stride(axis);
  const double h = grid.spacing(axis);
  const FluxLaw law{e.p[axis] - 2.0};

  // Face layout: same as the nodes but with n + 1 entries along `axis`.
  const Eigen::Index face_size = grid.size() / n * (n + 1);
  Eigen::ArrayXd faces = Eigen::ArrayXd::Zero(face_size);
  const Eigen::Index block = s * n;
  const Eigen::Index face_block = s * (n + 1);
  for (Eigen::Index outer = 0, fouter = 0; outer < grid.size(); outer += block, fouter += face_block) {
    for (Eigen::Index inner = 0; inner < s; ++inner) {
      for (int k = 0; k + 1 < n; ++k) {
        const Eigen::Index a = outer + inner + k * s;
        faces[fouter + inner + (k + 1) * s] = law((u.values[a + s] - u.values[a]) / h);
      }
    }
  }
  return faces;
}

Eigen::VectorXd max_diffusivity(const GridField& u, const ExponentSet& e) {
  Eigen::VectorXd D(u.grid.dim());
  for (int i = 0; i < u.grid.dim(); ++i) {
    D[i] = (e.p[i] - 1.0) * std::pow(max_abs_gradient(u, i), e.p[i] - 2.0);
  }
  return D;
}

double stable_dt(const GridField& u, const ExponentSet& e, double cfl, double dt_max) {
  const Eigen::VectorXd D = max_diffusivity(u, e);
  const double rate = (D.array() / u.grid.spacings().array().square()).sum();
  if (!(rate > 0.0)) return dt_max;
  return std::min(dt_max, cfl * 0.5 / rate);
}

StepStats step_into(const GridField& u, const ExponentSet& e, double dt, GridField& out,
                    double negativity_tolerance) {
  const Grid& grid = u.grid;
  if (!(out.grid == grid)) out = GridField(grid, u.time);
  out.values = u.values;
  out.time = u.time + dt;

  StepStats stats;
  stats.steps = 1;
  stats.dt = dt;
  stats.dt_min = dt;
  stats.mass_before = mass(u);

  const double* in = u.values.data();
  double* res = out.values.data();
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const int n = grid.nodes()[axis];
    const Eigen::Index s = grid.stride(axis);
    const double h = grid.spacing(axis);
    const double inv_h = 1.0 / h;
    const double coef = dt * inv_h;
    const FluxLaw law{e.p[axis] - 2.0};
    double gmax = 0.0;
    for_each_line(grid, axis, [&](Eigen::Index start) {
      for (int k = 0; k + 1 < n; ++k) {
        const Eigen::Index a = start + k * s;
        const double g = (in[a + s] - in[a]) * inv_h;
        if (g == 0.0) continue;
        gmax = std::max(gmax, std::abs(g));
        const double F = coef * law(g);
        res[a] += F;
        res[a + s] -= F;
      }
    });
    stats.max_diffusivity =
        std::max(stats.max_diffusivity, (e.p[axis] - 1.0) * std::pow(gmax, e.p[axis] - 2.0));
  }

  if (!out.values.allFinite()) {
    std::ostringstream os;
    os << "non-finite value after step at t = " << u.time << " (dt = " << dt << ")";
    throw NumericalAbort(os.str());
  }
  stats.mass_after = mass(out);
  stats.min_value = out.values.minCoeff();
  const double scale = std::max(u.values.abs().maxCoeff(), 0.0);
  if (stats.min_value < -negativity_tolerance * scale) {
    std::ostringstream os;
    os << "positivity lost at t = " << out.time << ": min value " << stats.min_value;
    throw NumericalAbort(os.str());
  }
  const double m = std::abs(stats.mass_before);
  stats.max_relative_mass_drift = m > 0.0 ? std::abs(stats.mass_after - stats.mass_before) / m : 0.0;
  return stats;
}

std::pair<GridField, StepStats> step(const GridField& u, const ExponentSet& e, double dt,
                                     double negativity_tolerance) {
  GridField out(u.grid, u.time);
  StepStats stats = step_into(u, e, dt, out, negativity_tolerance);
  return {std::move(out), stats};
}

Snapshot make_snapshot(GridField field, double support_threshold) {
  Snapshot s;
  s.mass = mass(field);
  s.max_value = field.values.size() > 0 ? field.values.maxCoeff() : 0.0;
  s.support = support_box_relative(field, support_threshold);
  s.near_boundary = s.support.cells_to_boundary(field.grid) < 5;
  s.field = std::move(field);
  return s;
}

std::vector<double> geometric_times(double from, double to, int count) {
  if (!(from > 0.0 && to > from) || count < 2) throw ValidationError("geometric schedule needs 0 < from < to and count >= 2");
  std::vector<double> times(static_cast<std::size_t>(count));
  const double ratio = std::log(to / from) / (count - 1);
  for (int k = 0; k < count; ++k) times[static_cast<std::size_t>(k)] = from * std::exp(ratio * k);
  times.back() = to;
  return times;
}

Trajectory run(const SimConfig& config) {
  Trajectory traj;
  GridField field = init_field(config);
  const double t0 = field.time;
  traj.initial = field;
  traj.initial_half_width = initial_half_width(config, field);

  const double initial_mass = mass(field);
  if (initial_mass > 0.0) {
    const double R0 = traj.initial_half_width.maxCoeff();
    for (int j = 0; j < config.e.N; ++j) {
      if (!(R0 > 0.0)) break;
      const double bound = support_radius(config.e, j, config.t_end, R0, initial_mass, config.support_constant);
      if (bound >= config.grid.half_width()[j]) {
        std::ostringstream os;
        os << "support bound " << bound << " along axis " << j + 1 << " at t_end exceeds the half-width "
           << config.grid.half_width()[j];
        traj.warnings.push_back(os.str());
      }
    }
  }

  std::vector<double> outputs;
  for (double t : config.output_times) {
    if (t > t0 && t < config.t_end) outputs.push_back(t);
  }
  outputs.push_back(config.t_end);
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end()), outputs.end());

  GridField scratch(config.grid, t0);
  double t = t0;
  bool warned_boundary = false;
  for (double t_out : outputs) {
    StepStats interval;
    interval.mass_before = mass(field);
    interval.dt_min = std::numeric_limits<double>::infinity();
    interval.min_value = field.values.minCoeff();
    while (t < t_out) {
      double dt = stable_dt(field, config.e, config.cfl, config.dt_max);
      const bool landing = t + dt >= t_out * (1.0 - 1e-14);
      if (landing) dt = t_out - t;
      const StepStats s = step_into(field, config.e, dt, scratch, config.negativity_tolerance);
      std::swap(field, scratch);
      t = landing ? t_out : t + dt;
      field.time = t;
      ++interval.steps;
      interval.dt = dt;
      if (!landing) interval.dt_min = std::min(interval.dt_min, dt);
      interval.max_diffusivity = std::max(interval.max_diffusivity, s.max_diffusivity);
      interval.max_relative_mass_drift = std::max(interval.max_relative_mass_drift, s.max_relative_mass_drift);
      interval.min_value = std::min(interval.min_value, s.min_value);
    }
    if (!std::isfinite(interval.dt_min)) interval.dt_min = interval.dt;
    interval.mass_after = mass(field);
    traj.log.push_back(interval);

    Snapshot snap = make_snapshot(field, config.support_threshold);
    if (snap.near_boundary && !warned_boundary) {
      std::ostringstream os;
      os << "support within 5 cells of the boundary at t = " << t;
      traj.warnings.push_back(os.str());
      warned_boundary = true;
    }
    traj.snapshots.push_back(std::move(snap));
  }
  return traj;
}

Trajectory sample_trajectory(const Grid& grid, const Evaluator& u, const std::vector<double>& times) {
  if (times.empty()) throw ValidationError("need at least one sample time");
  Trajectory traj;
  traj.initial = sample(grid, u, times.front());
  traj.initial_half_width = support_box_relative(traj.initial).half_width;
  for (double t : times) traj.snapshots.push_back(make_snapshot(sample(grid, u, t)));
  return traj;
}

} // namespace anisoflow
