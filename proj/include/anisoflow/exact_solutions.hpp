#pragma once

#include <Eigen/Core>

#include "anisoflow/grid.hpp"
#include "anisoflow/scaling_laws.hpp"

namespace anisoflow {

/// Source-type Barenblatt solution of the isotropic p-Laplace equation,
///   B(x,t) = t^{-N/lambda} {1 - gamma_p (|x| t^{-1/lambda})^{p/(p-1)}}_+^{(p-1)/(p-2)}.
/// Requires an isotropic exponent set and t > 0.
double barenblatt(const Eigen::VectorXd& x, double t, const ExponentSet& e);

// Radius of the support of B(., t).
double barenblatt_support_radius(double t, const ExponentSet& e);

Evaluator barenblatt_evaluator(const ExponentSet& e);

/// Parameters of the family B_{k,rho}(x, t, x_bar, t_bar).
struct BarenblattParams {
  double k = 1.0;
  double rho = 1.0;
  Eigen::VectorXd x_bar;
  double t_bar = 0.0;
  ExponentSet e;
};

BarenblattParams make_barenblatt_params(double k, double rho, Eigen::VectorXd x_bar, double t_bar,
                                        const ExponentSet& e);

// S(t) = lambda (p/(p-2))^{p-1} k^{p-2} rho^{N(p-2)} (t - t_bar) + rho^lambda.
double support_S(const BarenblattParams& params, double t);

double general_barenblatt(const BarenblattParams& params, const Eigen::VectorXd& x, double t);

/// Member of the B_{k,rho} family that coincides with barenblatt() for t >= t_bar.
/// rho is free; k and t_bar follow from matching amplitude and support.
BarenblattParams barenblatt_as_general(double rho, const ExponentSet& e);

struct ProfilePoint {
  double eta = 0.0;
  double value = 0.0;
};

// C(eta) = {1 - gamma_p eta^{p/(p-1)}}_+^{(p-1)/(p-2)}.
ProfilePoint profile(double eta, const ExponentSet& e);
double profile_derivative(double eta, const ExponentSet& e);
double profile_support_radius(const ExponentSet& e);

// |C'|^{p-2} C' + eta C / lambda with the analytic derivative.
double zero_flux_residual(double eta, const ExponentSet& e);

/// Stationary solution of the isotropic Fokker-Planck equation carrying mass M:
/// K C(|y|/L) with K^{p-2} = L^p and K L^N = M / mass(C).
Evaluator stationary_profile(const ExponentSet& e, double mass_target);

/// Separable source-type solution sum_i kappa_i (|x_i|^{p_i}/(T_i-t))^{1/(p_i-2)}.
struct SeparableParams {
  Eigen::VectorXd kappa;
  Eigen::VectorXd T_blowup;
  ExponentSet e;
};

// kappa(p) = [2(p-1)(p/(p-2))^{p-1}]^{-1/(p-2)}: the one value making each
// term an exact solution of the one-dimensional equation.
double default_kappa(double p);

SeparableParams make_separable_params(const ExponentSet& e, Eigen::VectorXd T_blowup);

double separable_solution(const SeparableParams& params, const Eigen::VectorXd& x, double t);

double heat_kernel(const Eigen::VectorXd& x, double t);

// |B_p(x,t) - t^{-N/2} exp(-|x|^2/(4t))| with B_p the Barenblatt solution for exponent p.
double heat_limit_gap(const Eigen::VectorXd& x, double t, double p);

/// Dilation (x,t) -> K u(x/L, t/T).
Evaluator apply_scaling(Evaluator u, double K, double L, double T);

bool is_admissible(double K, double L, double T, double p, double tol = 1e-12);

struct Dilation {
  double K = 1.0;
  double L = 1.0;
  double T = 1.0;
};

// Two-parameter group: K = (L^p/T)^{1/(p-2)}.
Dilation group_dilation(double L, double T, double p);

// One-parameter mass-preserving family: L = T^{1/lambda}, K = T^{-N/lambda}.
Dilation mass_preserving_dilation(double T, const ExponentSet& e);

struct HarnackFailureWitness {
  Eigen::VectorXd x0;
  double t0 = 0.0;
  double value_at_x0 = 0.0;
  double earlier_time = 0.0;  // t0 - rho^p
  double sampled_sup = 0.0;   // sup of B(., t0 - rho^p) over B_rho(x0)
  Eigen::VectorXd argmax;
};

/// Point on the free boundary of B at time t0 where B vanishes while B at the
/// earlier time t0 - rho^p is positive somewhere in B_rho(x0).
HarnackFailureWitness harnack_failure_witness(const ExponentSet& e, double rho, double t0 = 1.0,
                                              int samples = 2001);

/// Integral of x -> u(x, t) over the box prod_i [center_i - half_width_i, center_i + half_width_i],
/// adaptive Gauss-Kronrod on each axis (N <= 3).
double integrate_box(const Evaluator& u, double t, const Eigen::VectorXd& center,
                     const Eigen::VectorXd& half_width, double abs_tol = 1e-9);

} // namespace anisoflow
