#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "anisoflow/pde_solver.hpp"
#include "anisoflow/scaling_laws.hpp"

namespace anisoflow {

/// Least-squares fit of value = constant * t^exponent in log-log coordinates.
struct PowerLawFit {
  std::vector<std::pair<double, double>> samples;  // (t, value), value > 0
  double fitted_exponent = 0.0;
  double fitted_constant = 0.0;
  double r_squared = 0.0;
};

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& samples);

enum class Verdict { pass, fail, skipped, not_applicable };

std::string to_string(Verdict v);

struct Check {
  std::string name;
  double target = 0.0;
  double measured = 0.0;
  double tolerance = 0.0;  // relative unless stated in `reason`
  Verdict verdict = Verdict::skipped;
  std::string reason;
};

struct VerificationReport {
  std::vector<Check> checks;

  bool all_passed() const;  // skipped and not-applicable checks do not count as failures
  void add(Check c) { checks.push_back(std::move(c)); }
};

nlohmann::json to_json(const VerificationReport& report);
nlohmann::json to_json(const PowerLawFit& fit);

// Verdict for |measured - target| <= tolerance |target|.
Check relative_check(std::string name, double target, double measured, double tolerance);

inline constexpr double decay_tolerance = 0.10;
inline constexpr double support_tolerance = 0.15;
inline constexpr double transient_fraction = 0.20;

// Outputs kept for fitting: the first 20% are discarded as transient.
std::vector<const Snapshot*> post_transient(const Trajectory& trajectory);

/// Fits max_x u(., t) against t; target exponent -N/lambda.
/// Needs at least 5 post-transient outputs spanning a decade in time.
PowerLawFit fit_decay(const Trajectory& trajectory, const ExponentSet& e);
Check decay_check(const PowerLawFit& fit, const ExponentSet& e);

/// Fits (half-width_j - offset) against t with offset = 2 R0; outputs with
/// half-width <= offset + 2 h_j are excluded. Target exponent
/// (N(p_bar-p_j)+p_bar)/(lambda p_j). Throws ValidationError when the support
/// reached the grid boundary.
PowerLawFit fit_support_growth(const Trajectory& trajectory, const ExponentSet& e, int axis,
                               std::optional<double> offset = std::nullopt);
Check support_check(const PowerLawFit& fit, const ExponentSet& e, int axis);

struct HarnackPoint {
  Eigen::VectorXd x0;
  double t0 = 0.0;
};

struct HarnackCheck {
  Eigen::VectorXd x0;
  double t0 = 0.0;
  double u_value = 0.0;
  double rho = 0.0;
  double C_intrinsic = 0.0;
  double theta = 0.0;
  double inf_value = 0.0;
  double gamma_required = 0.0;  // +inf when the infimum vanishes
  bool cylinder_ok = false;
  bool skipped = false;
  std::string reason;
};

/// Value of the trajectory at (x, t): multilinear in space, linear in time
/// between stored outputs.
double trajectory_value(const Trajectory& trajectory, const Eigen::VectorXd& x, double t);

/// Evaluates the intrinsic Harnack inequality
///   u(x0,t0) <= gamma inf_{B_rho(x0)} u(., t0 + theta),  theta = C rho^p / u(x0,t0)^{p-2}
/// for every point and candidate C. The infimum runs over grid nodes strictly
/// inside the ball. Requires an isotropic exponent set.
std::vector<HarnackCheck> check_harnack(const Trajectory& trajectory, const ExponentSet& e,
                                        const std::vector<HarnackPoint>& points, double rho,
                                        const std::vector<double>& C_grid);

struct HarnackConstants {
  bool found = false;
  double gamma = 0.0;  // smallest gamma working at every non-skipped point
  double C = 0.0;
  int points_used = 0;
};

// Picks the candidate C minimizing the worst-case gamma across points.
HarnackConstants harnack_constants(const std::vector<HarnackCheck>& checks);

nlohmann::json to_json(const HarnackCheck& check);

/// Applies the dilation (x,t) -> (L x, T t), u -> K u with K = (L^p/T)^{1/(p-2)}
/// to every stored field.
Trajectory dilate_trajectory(const Trajectory& trajectory, double L, double T, double p);

/// A priori growth estimates of nonnegative solutions with measure data:
///   |||u(t)|||_r <= C |||u0|||_r  and
///   ||u(t)||_{L^inf(B_r)} <= C r^{a} t^{-N/lambda} |||u0|||_r^{b},
/// with the isotropic twins (a = p/(p-2), b = p/lambda) for isotropic sets and
/// (a = p_bar/N, b = p_bar/lambda) otherwise. C is fitted at the first
/// post-transient output; later outputs must stay within (1 + slack) C.
VerificationReport check_apriori_estimates(const Trajectory& trajectory, const ExponentSet& e,
                                           double r, double u0_norm, double slack);

// Same, with |||u0|||_r taken from trajectory.initial.
VerificationReport check_apriori_estimates(const Trajectory& trajectory, const ExponentSet& e,
                                           double r, double slack = 0.10);

enum class NormType { L1, Linf };

/// Discrete norm of numerical - exact at the grid nodes and the field's time;
/// L1 is weighted by the cell volume.
double error_vs_exact(const GridField& numerical, const Evaluator& exact, NormType norm);
double relative_error_vs_exact(const GridField& numerical, const Evaluator& exact, NormType norm);

/// Log-log SVG plot of a fit: samples, fitted line and a reference line with
/// the target slope through the geometric centre of the samples.
std::string svg_loglog(const PowerLawFit& fit, double target_slope, const std::string& title);

} // namespace anisoflow
