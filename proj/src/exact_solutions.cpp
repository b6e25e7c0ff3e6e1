#include "anisoflow/exact_solutions.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "anisoflow/errors.hpp"

namespace anisoflow {

namespace {

using boost::math::quadrature::gauss_kronrod;

// {base}_+^{power}: clamp before the fractional power.
double positive_part_pow(double base, double power) {
  return base > 0.0 ? std::pow(base, power) : 0.0;
}

void require_dim(const Eigen::VectorXd& x, int N) {
  if (x.size() != N) throw ValidationError("point dimension does not match the exponent set");
}

double quad1d(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  if (!(b > a)) return 0.0;
  double error = 0.0;
  double l1 = 0.0;
  // Boost's tolerance is relative to the L1 norm of the integrand.
  const double value = gauss_kronrod<double, 31>::integrate(f, a, b, 15, 1e-10, &error, &l1);
  if (error > abs_tol && error > 1e-10 * l1) {
    throw NumericalAbort("quadrature did not reach the requested tolerance");
  }
  return value;
}

} // namespace

double barenblatt(const Eigen::VectorXd& x, double t, const ExponentSet& e) {
  if (t <= 0.0) throw ValidationError("Barenblatt solution needs t > 0");
  const double p = e.p_iso();
  require_dim(x, e.N);
  const double lam = *e.lambda_iso;
  const double eta = x.norm() * std::pow(t, -1.0 / lam);
  const double bracket = 1.0 - *e.gamma_p * std::pow(eta, p / (p - 1.0));
  return std::pow(t, -e.N / lam) * positive_part_pow(bracket, (p - 1.0) / (p - 2.0));
}

double barenblatt_support_radius(double t, const ExponentSet& e) {
  if (t <= 0.0) throw ValidationError("Barenblatt solution needs t > 0");
  return std::pow(t, 1.0 / *e.lambda_iso) * profile_support_radius(e);
}

Evaluator barenblatt_evaluator(const ExponentSet& e) {
  e.p_iso();
  return [e](const Eigen::VectorXd& x, double t) { return barenblatt(x, t, e); };
}

BarenblattParams make_barenblatt_params(double k, double rho, Eigen::VectorXd x_bar, double t_bar,
                                        const ExponentSet& e) {
  e.p_iso();
  if (!(k > 0.0) || !(rho > 0.0)) throw ValidationError("B_{k,rho} needs k > 0 and rho > 0");
  if (x_bar.size() == 0) x_bar = Eigen::VectorXd::Zero(e.N);
  require_dim(x_bar, e.N);
  return BarenblattParams{k, rho, std::move(x_bar), t_bar, e};
}

double support_S(const BarenblattParams& params, double t) {
  if (t < params.t_bar) throw ValidationError("B_{k,rho} is defined for t >= t_bar");
  const ExponentSet& e = params.e;
  const double p = e.p_iso();
  const double lam = *e.lambda_iso;
  const double slope = lam * std::pow(p / (p - 2.0), p - 1.0) * std::pow(params.k, p - 2.0) *
                       std::pow(params.rho, e.N * (p - 2.0));
  return slope * (t - params.t_bar) + std::pow(params.rho, lam);
}

double general_barenblatt(const BarenblattParams& params, const Eigen::VectorXd& x, double t) {
  const ExponentSet& e = params.e;
  const double p = e.p_iso();
  require_dim(x, e.N);
  const double lam = *e.lambda_iso;
  const double S = support_S(params, t);
  const double ratio = (x - params.x_bar).norm() / std::pow(S, 1.0 / lam);
  const double bracket = 1.0 - std::pow(ratio, p / (p - 1.0));
  return params.k * std::pow(params.rho, e.N) / std::pow(S, e.N / lam) *
         positive_part_pow(bracket, (p - 1.0) / (p - 2.0));
}

BarenblattParams barenblatt_as_general(double rho, const ExponentSet& e) {
  const double p = e.p_iso();
  const double lam = *e.lambda_iso;
  const double q = p / (p - 1.0);
  const double gamma = *e.gamma_p;
  // k rho^N gamma^{N/q} = 1 matches amplitudes; S(t) = gamma^{-lambda/q} t matches supports.
  const double k = std::pow(gamma, -e.N / q) / std::pow(rho, e.N);
  BarenblattParams params = make_barenblatt_params(k, rho, Eigen::VectorXd::Zero(e.N), 0.0, e);
  const double slope = support_S(params, 1.0) - std::pow(rho, lam);
  params.t_bar = std::pow(rho, lam) / slope;
  return params;
}

double profile_support_radius(const ExponentSet& e) {
  const double p = e.p_iso();
  return std::pow(1.0 / *e.gamma_p, (p - 1.0) / p);
}

ProfilePoint profile(double eta, const ExponentSet& e) {
  const double p = e.p_iso();
  if (eta < 0.0) throw ValidationError("profile needs eta >= 0");
  const double bracket = 1.0 - *e.gamma_p * std::pow(eta, p / (p - 1.0));
  return {eta, positive_part_pow(bracket, (p - 1.0) / (p - 2.0))};
}

double profile_derivative(double eta, const ExponentSet& e) {
  const double p = e.p_iso();
  const double C = profile(eta, e).value;
  if (C == 0.0) return 0.0;
  // C' = -gamma p/(p-2) C^{1/(p-1)} eta^{1/(p-1)}
  return -*e.gamma_p * p / (p - 2.0) * std::pow(C * eta, 1.0 / (p - 1.0));
}

double zero_flux_residual(double eta, const ExponentSet& e) {
  const double p = e.p_iso();
  const double C = profile(eta, e).value;
  const double dC = profile_derivative(eta, e);
  const double flux = std::pow(std::abs(dC), p - 2.0) * dC;
  return flux + eta * C / *e.lambda_iso;
}

Evaluator stationary_profile(const ExponentSet& e, double mass_target) {
  const double p = e.p_iso();
  if (!(mass_target > 0.0)) throw ValidationError("stationary profile needs positive mass");
  const int N = e.N;
  const double R = profile_support_radius(e);
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * N) / std::tgamma(0.5 * N);
  const double profile_mass =
      sphere * quad1d([&](double eta) { return profile(eta, e).value * std::pow(eta, N - 1); }, 0.0, R, 1e-12);
  const double L = std::pow(mass_target / profile_mass, (p - 2.0) / *e.lambda_iso);
  const double K = std::pow(L, p / (p - 2.0));
  return [e, K, L](const Eigen::VectorXd& y, double) { return K * profile(y.norm() / L, e).value; };
}

double default_kappa(double p) {
  if (!(p > 2.0)) throw ValidationError("p_i must exceed 2");
  return std::pow(2.0 * (p - 1.0) * std::pow(p / (p - 2.0), p - 1.0), -1.0 / (p - 2.0));
}

SeparableParams make_separable_params(const ExponentSet& e, Eigen::VectorXd T_blowup) {
  if (T_blowup.size() != e.N) throw ValidationError("need one blow-up time per axis");
  SeparableParams params;
  params.kappa.resize(e.N);
  for (int i = 0; i < e.N; ++i) params.kappa[i] = default_kappa(e.p[i]);
  params.T_blowup = std::move(T_blowup);
  params.e = e;
  return params;
}

double separable_solution(const SeparableParams& params, const Eigen::VectorXd& x, double t) {
  const ExponentSet& e = params.e;
  require_dim(x, e.N);
  if (t >= params.T_blowup.minCoeff()) throw ValidationError("separable solution blows up at min T_i");
  double sum = 0.0;
  for (int i = 0; i < e.N; ++i) {
    const double pi = e.p[i];
    sum += params.kappa[i] * std::pow(std::pow(std::abs(x[i]), pi) / (params.T_blowup[i] - t), 1.0 / (pi - 2.0));
  }
  return sum;
}

double heat_kernel(const Eigen::VectorXd& x, double t) {
  if (t <= 0.0) throw ValidationError("heat kernel needs t > 0");
  const double N = static_cast<double>(x.size());
  return std::pow(t, -0.5 * N) * std::exp(-x.squaredNorm() / (4.0 * t));
}

double heat_limit_gap(const Eigen::VectorXd& x, double t, double p) {
  const ExponentSet e = isotropic_exponents(static_cast<int>(x.size()), p);
  return std::abs(barenblatt(x, t, e) - heat_kernel(x, t));
}

Evaluator apply_scaling(Evaluator u, double K, double L, double T) {
  if (!(K > 0.0 && L > 0.0 && T > 0.0)) throw ValidationError("dilation needs K, L, T > 0");
  return [u = std::move(u), K, L, T](const Eigen::VectorXd& x, double t) { return K * u(x / L, t / T); };
}

bool is_admissible(double K, double L, double T, double p, double tol) {
  const double Lp = std::pow(L, p);
  return std::abs(T * std::pow(K, p - 2.0) - Lp) <= tol * Lp;
}

Dilation group_dilation(double L, double T, double p) {
  if (!(L > 0.0 && T > 0.0)) throw ValidationError("dilation needs L, T > 0");
  return {std::pow(std::pow(L, p) / T, 1.0 / (p - 2.0)), L, T};
}

Dilation mass_preserving_dilation(double T, const ExponentSet& e) {
  e.p_iso();
  if (!(T > 0.0)) throw ValidationError("dilation needs T > 0");
  const double lam = *e.lambda_iso;
  return {std::pow(T, -e.N / lam), std::pow(T, 1.0 / lam), T};
}

HarnackFailureWitness harnack_failure_witness(const ExponentSet& e, double rho, double t0, int samples) {
  const double p = e.p_iso();
  if (!(rho > 0.0)) throw ValidationError("witness needs rho > 0");
  HarnackFailureWitness w;
  w.t0 = t0;
  w.earlier_time = t0 - std::pow(rho, p);
  if (!(w.earlier_time > 0.0)) throw ValidationError("rho too large: t0 - rho^p must stay positive");

  w.x0 = Eigen::VectorXd::Zero(e.N);
  w.x0[0] = barenblatt_support_radius(t0, e);
  // Round-off can leave the computed radius a hair inside the support.
  while (barenblatt(w.x0, t0, e) > 0.0) {
    w.x0[0] = std::nextafter(w.x0[0], std::numeric_limits<double>::infinity());
  }
  w.value_at_x0 = barenblatt(w.x0, t0, e);

  // B(., t) is radially decreasing, so the sup over the ball lies on the
  // diameter through the origin; sample it densely.
  w.argmax = w.x0;
  for (int k = 1; k <= samples; ++k) {
    const double s = rho * (-1.0 + 2.0 * k / (samples + 1.0));
    Eigen::VectorXd x = w.x0;
    x[0] += s;
    const double v = barenblatt(x, w.earlier_time, e);
    if (v > w.sampled_sup) {
      w.sampled_sup = v;
      w.argmax = x;
    }
  }
  return w;
}

double integrate_box(const Evaluator& u, double t, const Eigen::VectorXd& center,
                     const Eigen::VectorXd& half_width, double abs_tol) {
  const int N = static_cast<int>(center.size());
  if (N < 1 || N > 3) throw ValidationError("box quadrature supports 1 to 3 dimensions");
  if (half_width.size() != N) throw ValidationError("box half-widths do not match the center");
  Eigen::VectorXd x = center;
  std::function<double(int)> nested = [&](int axis) -> double {
    const double a = center[axis] - half_width[axis];
    const double b = center[axis] + half_width[axis];
    return quad1d(
        [&, axis](double s) {
          x[axis] = s;
          return axis + 1 == N ? u(x, t) : nested(axis + 1);
        },
        a, b, abs_tol);
  };
  return nested(0);
}

} // namespace anisoflow
