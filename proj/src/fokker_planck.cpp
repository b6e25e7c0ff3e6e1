#include "anisoflow/fokker_planck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "anisoflow/errors.hpp"
#include "anisoflow/exact_solutions.hpp"

namespace anisoflow {

namespace {

double flux_law(double g, double exponent) {
  if (exponent == 1.0) return std::abs(g) * g;
  if (exponent == 2.0) return g * g * g;
  if (g == 0.0) return 0.0;
  return std::pow(std::abs(g), exponent) * g;
}

Eigen::VectorXd time_powers(const ExponentSet& e, double t, double sign) {
  Eigen::VectorXd f(e.N);
  for (int i = 0; i < e.N; ++i) f[i] = std::pow(t, sign * e.alpha[i]);
  return f;
}

} // namespace

Grid selfsimilar_grid(const Grid& x_grid, double t, const ExponentSet& e) {
  if (!(t > 0.0)) throw ValidationError("self-similar variables need t > 0");
  return x_grid.scaled(time_powers(e, t, 1.0));
}

RescaledField to_selfsimilar(const GridField& u, const ExponentSet& e, const std::optional<Grid>& y_grid) {
  const double t = u.time;
  if (!(t > 0.0)) throw ValidationError("self-similar variables need t > 0");
  if (u.grid.dim() != e.N) throw ValidationError("field dimension does not match the exponents");
  const Grid grid = y_grid ? *y_grid : selfsimilar_grid(u.grid, t, e);
  const Eigen::VectorXd back = time_powers(e, t, -1.0);
  const double amplitude = std::pow(t, e.beta);

  RescaledField w;
  w.tau = std::log(t);
  w.field = GridField(grid, w.tau);
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const Eigen::VectorXd x = grid.point(k).cwiseProduct(back);
    w.field.values[k] = amplitude * interpolate(u, x);
  }
  return w;
}

GridField from_selfsimilar(const RescaledField& w, double t, const ExponentSet& e, const std::optional<Grid>& x_grid) {
  if (!(t > 0.0)) throw ValidationError("self-similar variables need t > 0");
  const Eigen::VectorXd forward = time_powers(e, t, 1.0);
  const Grid grid = x_grid ? *x_grid : w.field.grid.scaled(forward.cwiseInverse());
  const double amplitude = std::pow(t, -e.beta);
  GridField u(grid, t);
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const Eigen::VectorXd y = grid.point(k).cwiseProduct(forward);
    u.values[k] = amplitude * interpolate(w.field, y);
  }
  return u;
}

Eigen::ArrayXd fp_operator(const GridField& w, const ExponentSet& e) {
  const Grid& grid = w.grid;
  if (grid.dim() != e.N) throw ValidationError("field dimension does not match the exponents");
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(grid.size());
  const double* in = w.values.data();
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const int n = grid.nodes()[axis];
    const Eigen::Index s = grid.stride(axis);
    const double inv_h = 1.0 / grid.spacing(axis);
    const double exponent = e.p[axis] - 2.0;
    const double alpha = e.alpha[axis];
    Eigen::VectorXd velocity(n - 1);  // alpha_i y_i at the faces
    for (int k = 0; k + 1 < n; ++k) {
      velocity[k] = alpha * 0.5 * (grid.coordinate(axis, k) + grid.coordinate(axis, k + 1));
    }
    const Eigen::Index block = s * n;
    for (Eigen::Index outer = 0; outer < grid.size(); outer += block) {
      for (Eigen::Index inner = 0; inner < s; ++inner) {
        const Eigen::Index start = outer + inner;
        for (int k = 0; k + 1 < n; ++k) {
          const Eigen::Index a = start + k * s;
          const double g = (in[a + s] - in[a]) * inv_h;
          const double v = velocity[k];
          const double upwind = v > 0.0 ? in[a] : in[a + s];
          const double B = (flux_law(g, exponent) - v * upwind) * inv_h;
          out[a] += B;
          out[a + s] -= B;
        }
      }
    }
  }
  return out;
}

double fp_stable_dtau(const GridField& w, const ExponentSet& e, double cfl, double dtau_max) {
  const Grid& grid = w.grid;
  double rate = 0.0;
  for (int axis = 0; axis < grid.dim(); ++axis) {
    const int n = grid.nodes()[axis];
    const Eigen::Index s = grid.stride(axis);
    const double h = grid.spacing(axis);
    double gmax = 0.0;
    const Eigen::Index block = s * n;
    for (Eigen::Index outer = 0; outer < grid.size(); outer += block) {
      for (Eigen::Index inner = 0; inner < s; ++inner) {
        for (int k = 0; k + 1 < n; ++k) {
          const Eigen::Index a = outer + inner + k * s;
          gmax = std::max(gmax, std::abs(w.values[a + s] - w.values[a]));
        }
      }
    }
    gmax /= h;
    const double D = (e.p[axis] - 1.0) * std::pow(gmax, e.p[axis] - 2.0);
    rate += 2.0 * D / (h * h) + std::abs(e.alpha[axis]) * grid.half_width()[axis] / h;
  }
  if (!(rate > 0.0)) return dtau_max;
  return std::min(dtau_max, cfl / rate);
}

RescaledField fp_step(const RescaledField& w, const ExponentSet& e, double dtau) {
  RescaledField next = w;
  next.field.values += dtau * fp_operator(w.field, e);
  if (!next.field.values.allFinite()) {
    std::ostringstream os;
    os << "non-finite value in the rescaled equation at tau = " << w.tau;
    throw NumericalAbort(os.str());
  }
  next.tau = w.tau + dtau;
  next.field.time = next.tau;
  return next;
}

RescaledField fp_advance(const RescaledField& w, const ExponentSet& e, double dtau_total, double cfl) {
  RescaledField current = w;
  const double target = w.tau + dtau_total;
  while (current.tau < target) {
    double dtau = fp_stable_dtau(current.field, e, cfl);
    const bool landing = current.tau + dtau >= target - 1e-14 * std::max(1.0, std::abs(target));
    if (landing) dtau = target - current.tau;
    current = fp_step(current, e, dtau);
    if (landing) {
      current.tau = target;
      current.field.time = target;
    }
  }
  return current;
}

double steady_residual(const GridField& w, const ExponentSet& e) {
  const double m = mass(w);
  if (m == 0.0) return 0.0;
  return fp_operator(w, e).abs().sum() * w.grid.cell_volume() / std::abs(m);
}

std::pair<RescaledField, StationaryVerdict> evolve_to_stationary(const RescaledField& w0, const ExponentSet& e,
                                                                 const StationaryOptions& options) {
  if (w0.field.values.minCoeff() < 0.0) throw ValidationError("stationary search needs nonnegative data");
  if (!(mass(w0.field) > 0.0)) throw ValidationError("stationary search needs positive mass");
  if (!(options.tol > 0.0) || !(options.tau_max > 0.0)) throw ValidationError("tol and tau_max must be positive");

  StationaryVerdict verdict;
  verdict.residual_tolerance = options.residual_tol;
  const double peak0 = w0.field.values.maxCoeff();
  RescaledField current = w0;
  double previous_change = 0.0;
  const double tau_end = w0.tau + options.tau_max;
  while (current.tau < tau_end - 1e-12) {
    const double window = std::min(1.0, tau_end - current.tau);
    RescaledField next = fp_advance(current, e, window, options.cfl);
    if (next.field.values.maxCoeff() > 10.0 * peak0) {
      std::ostringstream os;
      os << "rescaled solution diverges: max grew beyond 10x the initial maximum by tau = " << next.tau;
      throw NumericalAbort(os.str());
    }
    const double change = (next.field.values - current.field.values).abs().sum() /
                          current.field.values.abs().sum() / window;
    ++verdict.windows;
    if (previous_change > 0.0) verdict.l1_rate = change / previous_change;
    previous_change = change;
    verdict.last_change = change;
    current = std::move(next);
    if (change < options.tol) {
      verdict.final_residual = steady_residual(current.field, e);
      if (verdict.final_residual < options.residual_tol) {
        verdict.converged = true;
        break;
      }
    }
  }
  if (!verdict.converged) verdict.final_residual = steady_residual(current.field, e);
  verdict.tau_reached = current.tau - w0.tau;
  return {std::move(current), verdict};
}

GridField warm_start(const Grid& y_grid, const ExponentSet& e, double mass_target) {
  const ExponentSet iso = isotropic_exponents(e.N, e.p_bar);
  const double L_max = y_grid.half_width().maxCoeff();
  const Eigen::VectorXd ratio = y_grid.half_width() / L_max;
  const double scale = 0.6 * L_max / profile_support_radius(iso);
  GridField f(y_grid, 0.0);
  for (Eigen::Index k = 0; k < y_grid.size(); ++k) {
    const double r = y_grid.point(k).cwiseQuotient(ratio).norm();
    f.values[k] = profile(r / scale, iso).value;
  }
  const double m = mass(f);
  if (!(m > 0.0)) throw ValidationError("warm start is not resolved by the grid");
  f.values *= mass_target / m;
  return f;
}

GridField bump(const Grid& grid, double radius, double mass_target) {
  GridField f(grid, 0.0);
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double r = grid.point(k).norm();
    if (r < radius) f.values[k] = 0.5 * (1.0 + std::cos(std::numbers::pi * r / radius));
  }
  const double m = mass(f);
  if (!(m > 0.0)) throw ValidationError("bump is not resolved by the grid");
  f.values *= mass_target / m;
  return f;
}

} // namespace anisoflow
