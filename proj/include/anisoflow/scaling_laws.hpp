#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace anisoflow {

struct GridField;

/// All scaling constants of the anisotropic p-Laplace evolution
///   u_t = sum_i (|u_{x_i}|^{p_i-2} u_{x_i})_{x_i},   p_i > 2,
/// gathered in one place. Build it with build_exponent_set(); the fields
/// are consistent with each other by construction.
struct ExponentSet {
  int N = 0;
  Eigen::VectorXd p;              // non-decreasing, every entry > 2
  double p_bar = 0.0;             // harmonic mean of p
  std::optional<double> p_star;   // N p_bar / (N - p_bar), only when p_bar < N
  std::optional<double> lambda_iso;  // N(p-2)+p, only when all p_i coincide
  double lambda_aniso = 0.0;      // N(p_bar-2)+p_bar
  std::optional<double> gamma_p;  // isotropic Barenblatt constant
  double beta = 0.0;              // N / lambda
  Eigen::VectorXd alpha;          // beta - (1+2 beta)/p_i, negative while p_i < p_bar (1 + 1/N)

  bool isotropic() const { return lambda_iso.has_value(); }
  double lambda() const { return lambda_aniso; }
  // Common exponent of the isotropic case; throws ValidationError otherwise.
  double p_iso() const;
};

double harmonic_mean(const Eigen::VectorXd& p);

ExponentSet build_exponent_set(int N, const Eigen::VectorXd& p);
ExponentSet build_exponent_set(const std::vector<double>& p);
ExponentSet isotropic_exponents(int N, double p);

struct BoundednessReport {
  bool holds = false;
  bool p_bar_below_dimension = false;
  bool max_below_p_star = false;
  std::vector<std::string> failed;
};

// p_bar < N and max_i p_i < p_bar^*.
BoundednessReport check_boundedness_condition(const ExponentSet& e);

// Time exponent (N(p_bar-p_j)+p_bar)/(lambda p_j) of the support bound along axis j.
// It equals -alpha_j.
double support_time_exponent(const ExponentSet& e, int axis);
// Mass exponent (p_bar/p_j)(p_j-2)/lambda of the same bound.
double support_mass_exponent(const ExponentSet& e, int axis);

/// Half-width bound of the support along `axis`:
/// 2 R0 + C t^{(N(p_bar-p_j)+p_bar)/(lambda p_j)} |u0|_1^{(p_bar/p_j)(p_j-2)/lambda}.
double support_radius(const ExponentSet& e, int axis, double t, double R0, double mass1,
                      double C = 1.0);

/// L-infinity decay bound C t^{-N/lambda} |u0|_1^{p_bar/lambda}; t must be positive.
double decay_bound(const ExponentSet& e, double t, double mass1, double C = 1.0);

enum class NormKind { isotropic, anisotropic };

std::string to_string(NormKind kind);
NormKind norm_kind_from_string(const std::string& name);

struct GrowthNorm {
  NormKind kind = NormKind::isotropic;
  double r = 0.0;
  double value = 0.0;
  double argmax_rho = 0.0;  // rho attaining the supremum
  double rho_max = 0.0;     // top of the admissible range (grid bounding box)
  int breakpoints = 0;      // number of rho values examined
};

// Weight exponent of the growth norm: lambda/(p-2) for the isotropic kind,
// lambda/N for the anisotropic one.
double growth_weight_exponent(const ExponentSet& e, NormKind kind);

// Half-widths of the anisotropic box B_rho: rho^{p_bar(p_i-2)/(p_i(p_bar-2))}/2.
Eigen::VectorXd anisotropic_box_half_widths(const ExponentSet& e, double rho);

/// Growth norm sup_{rho >= r} rho^{-w} \int_{B_rho} |f| of a grid field, where
/// B_rho is the Euclidean ball (isotropic kind) or the anisotropic box.
/// The integral over B_rho of nodal data is piecewise constant in rho, so the
/// supremum is taken exactly over rho = r and every node "radius" above r,
/// up to the largest rho whose B_rho still fits inside the grid.
GrowthNorm triple_norm(const GridField& field, double r, NormKind kind, const ExponentSet& e);

// Growth norm of the measure M delta_0; the supremum sits at rho = r.
GrowthNorm triple_norm_point_mass(double mass, double r, NormKind kind, const ExponentSet& e);

enum class WaitingRegime { vanishing_mass, large_mass, small_mass };

std::string to_string(WaitingRegime regime);

struct WaitingTime {
  double value = 0.0;  // +infinity iff regime == vanishing_mass
  WaitingRegime regime = WaitingRegime::vanishing_mass;
  double gamma_threshold = 1.0;
};

WaitingTime waiting_time(double M_inf, const ExponentSet& e, double gamma = 1.0);

// Exponent of (M_inf/gamma) in the waiting time when the axis with exponent p_k governs.
double waiting_time_exponent(const ExponentSet& e, double p_k);

/// Existence time C0 M_inf^{2-p} of the isotropic Cauchy problem with
/// measure data; +infinity when M_inf = 0.
double existence_time_isotropic(double M_inf, const ExponentSet& e, double C0 = 1.0);

} // namespace anisoflow
