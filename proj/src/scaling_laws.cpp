#include "anisoflow/scaling_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "anisoflow/errors.hpp"
#include "anisoflow/grid.hpp"

namespace anisoflow {

namespace {

void require_exponents(const Eigen::VectorXd& p) {
  if (p.size() == 0) throw ValidationError("exponent vector is empty");
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] <= 2.0) {
      std::ostringstream os;
      os << "p_i must exceed 2 (p_" << i + 1 << " = " << p[i] << ")";
      throw ValidationError(os.str());
    }
  }
}

} // namespace

double ExponentSet::p_iso() const {
  if (!isotropic()) throw ValidationError("operation requires equal exponents p_i");
  return p[0];
}

double harmonic_mean(const Eigen::VectorXd& p) {
  require_exponents(p);
  return static_cast<double>(p.size()) / p.cwiseInverse().sum();
}

ExponentSet build_exponent_set(int N, const Eigen::VectorXd& p) {
  if (N <= 0) throw ValidationError("dimension N must be positive");
  if (p.size() != N) {
    std::ostringstream os;
    os << "dimension N = " << N << " does not match " << p.size() << " exponents";
    throw ValidationError(os.str());
  }
  require_exponents(p);
  for (Eigen::Index i = 1; i < p.size(); ++i) {
    if (p[i] < p[i - 1]) throw ValidationError("exponents must be ordered non-decreasingly");
  }

  ExponentSet e;
  e.N = N;
  e.p = p;
  e.p_bar = harmonic_mean(p);
  const double n = N;
  if (e.p_bar < n) e.p_star = n * e.p_bar / (n - e.p_bar);

  const bool all_equal = (p.array() == p[0]).all();
  if (all_equal) {
    // p_bar can differ from p[0] in the last bit; use the exact exponent.
    e.p_bar = p[0];
    if (e.p_bar < n) e.p_star = n * e.p_bar / (n - e.p_bar);
    const double pp = p[0];
    const double lam = n * (pp - 2.0) + pp;
    e.lambda_iso = lam;
    e.gamma_p = std::pow(1.0 / lam, 1.0 / (pp - 1.0)) * (pp - 2.0) / pp;
  }
  e.lambda_aniso = n * (e.p_bar - 2.0) + e.p_bar;
  e.beta = n / e.lambda_aniso;
  e.alpha = (e.beta - (1.0 + 2.0 * e.beta) / p.array()).matrix();

  // With beta = N/lambda the reaction coefficient beta + sum alpha_i vanishes.
  const double reaction = e.beta + e.alpha.sum();
  if (std::abs(reaction) > 1e-10 * (1.0 + e.beta)) {
    throw NumericalAbort("scaling exponents are inconsistent: beta + sum alpha_i != 0");
  }
  return e;
}

ExponentSet build_exponent_set(const std::vector<double>& p) {
  return build_exponent_set(static_cast<int>(p.size()),
                            Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size())));
}

ExponentSet isotropic_exponents(int N, double p) {
  if (N <= 0) throw ValidationError("dimension N must be positive");
  return build_exponent_set(N, Eigen::VectorXd::Constant(N, p));
}

BoundednessReport check_boundedness_condition(const ExponentSet& e) {
  BoundednessReport report;
  report.p_bar_below_dimension = e.p_bar < static_cast<double>(e.N);
  if (!report.p_bar_below_dimension) report.failed.emplace_back("p_bar < N");
  if (e.p_star) {
    report.max_below_p_star = e.p.maxCoeff() < *e.p_star;
  }
  if (!report.max_below_p_star) report.failed.emplace_back("max p_i < p_bar*");
  report.holds = report.p_bar_below_dimension && report.max_below_p_star;
  return report;
}

double support_time_exponent(const ExponentSet& e, int axis) {
  const double pj = e.p[axis];
  return (e.N * (e.p_bar - pj) + e.p_bar) / (e.lambda() * pj);
}

double support_mass_exponent(const ExponentSet& e, int axis) {
  const double pj = e.p[axis];
  return (e.p_bar / pj) * (pj - 2.0) / e.lambda();
}

double support_radius(const ExponentSet& e, int axis, double t, double R0, double mass1, double C) {
  if (axis < 0 || axis >= e.N) throw ValidationError("axis out of range");
  if (t < 0.0) throw ValidationError("support_radius needs t >= 0");
  if (R0 <= 0.0 || mass1 <= 0.0 || C <= 0.0) {
    throw ValidationError("support_radius needs R0, mass and C positive");
  }
  if (t == 0.0) return 2.0 * R0;
  return 2.0 * R0 + C * std::pow(t, support_time_exponent(e, axis)) *
                        std::pow(mass1, support_mass_exponent(e, axis));
}

double decay_bound(const ExponentSet& e, double t, double mass1, double C) {
  if (t <= 0.0) throw ValidationError("decay_bound needs t > 0");
  return C * std::pow(t, -e.N / e.lambda()) * std::pow(mass1, e.p_bar / e.lambda());
}

std::string to_string(NormKind kind) {
  return kind == NormKind::isotropic ? "isotropic" : "anisotropic";
}

NormKind norm_kind_from_string(const std::string& name) {
  if (name == "isotropic") return NormKind::isotropic;
  if (name == "anisotropic") return NormKind::anisotropic;
  throw ValidationError("unknown norm kind '" + name + "'");
}

double growth_weight_exponent(const ExponentSet& e, NormKind kind) {
  if (kind == NormKind::isotropic) {
    return e.lambda() / (e.p_iso() - 2.0);
  }
  return e.lambda() / e.N;
}

Eigen::VectorXd anisotropic_box_half_widths(const ExponentSet& e, double rho) {
  Eigen::VectorXd h(e.N);
  for (int i = 0; i < e.N; ++i) {
    const double a = e.p_bar * (e.p[i] - 2.0) / (e.p[i] * (e.p_bar - 2.0));
    h[i] = 0.5 * std::pow(rho, a);
  }
  return h;
}

GrowthNorm triple_norm(const GridField& field, double r, NormKind kind, const ExponentSet& e) {
  if (r <= 0.0) throw ValidationError("growth norm needs r > 0");
  const Grid& grid = field.grid;
  if (grid.dim() != e.N) throw ValidationError("field dimension does not match exponents");
  const double w = growth_weight_exponent(e, kind);

  // Box exponents: node x lies in B_rho iff |x_i| <= rho^{a_i}/2 for all i,
  // i.e. rho >= max_i (2|x_i|)^{1/a_i}.
  Eigen::VectorXd a = Eigen::VectorXd::Ones(e.N);
  if (kind == NormKind::anisotropic) {
    for (int i = 0; i < e.N; ++i) a[i] = e.p_bar * (e.p[i] - 2.0) / (e.p[i] * (e.p_bar - 2.0));
  }
  auto node_radius = [&](const Eigen::VectorXd& x) {
    if (kind == NormKind::isotropic) return x.norm();
    double rad = 0.0;
    for (int i = 0; i < e.N; ++i) rad = std::max(rad, std::pow(2.0 * std::abs(x[i]), 1.0 / a[i]));
    return rad;
  };

  // Largest rho whose B_rho stays inside the grid box.
  double rho_max = std::numeric_limits<double>::infinity();
  for (int i = 0; i < e.N; ++i) {
    const double L = grid.half_width()[i];
    rho_max = std::min(rho_max, kind == NormKind::isotropic ? L : std::pow(2.0 * L, 1.0 / a[i]));
  }
  if (r > rho_max) throw ValidationError("grid domain is smaller than the growth-norm radius r");

  std::vector<std::pair<double, double>> nodes;  // (radius, |f| * cell volume)
  nodes.reserve(static_cast<std::size_t>(grid.size()));
  const double vol = grid.cell_volume();
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double v = std::abs(field.values[k]);
    if (v == 0.0) continue;
    nodes.emplace_back(node_radius(grid.point(k)), v * vol);
  }
  std::sort(nodes.begin(), nodes.end());

  GrowthNorm g;
  g.kind = kind;
  g.r = r;
  g.rho_max = rho_max;

  double cumulative = 0.0;
  std::size_t idx = 0;
  while (idx < nodes.size() && nodes[idx].first <= r) cumulative += nodes[idx++].second;
  g.value = std::pow(r, -w) * cumulative;
  g.argmax_rho = r;
  g.breakpoints = 1;
  while (idx < nodes.size() && nodes[idx].first <= rho_max) {
    const double rho = nodes[idx].first;
    while (idx < nodes.size() && nodes[idx].first == rho) cumulative += nodes[idx++].second;
    const double candidate = std::pow(rho, -w) * cumulative;
    ++g.breakpoints;
    if (candidate > g.value) {
      g.value = candidate;
      g.argmax_rho = rho;
    }
  }
  return g;
}

GrowthNorm triple_norm_point_mass(double mass, double r, NormKind kind, const ExponentSet& e) {
  if (r <= 0.0) throw ValidationError("growth norm needs r > 0");
  GrowthNorm g;
  g.kind = kind;
  g.r = r;
  g.value = std::abs(mass) * std::pow(r, -growth_weight_exponent(e, kind));
  g.argmax_rho = r;
  g.rho_max = std::numeric_limits<double>::infinity();
  g.breakpoints = 1;
  return g;
}

std::string to_string(WaitingRegime regime) {
  switch (regime) {
    case WaitingRegime::vanishing_mass: return "vanishing_mass";
    case WaitingRegime::large_mass: return "large_mass";
    case WaitingRegime::small_mass: return "small_mass";
  }
  return "unknown";
}

double waiting_time_exponent(const ExponentSet& e, double p_k) {
  return (e.N * (e.p_bar - p_k) + e.p_bar) / (e.p_bar * (p_k - 2.0));
}

WaitingTime waiting_time(double M_inf, const ExponentSet& e, double gamma) {
  if (M_inf < 0.0) throw ValidationError("M_inf must be nonnegative");
  if (gamma <= 0.0) throw ValidationError("gamma threshold must be positive");
  WaitingTime w;
  w.gamma_threshold = gamma;
  if (M_inf == 0.0) {
    w.regime = WaitingRegime::vanishing_mass;
    w.value = std::numeric_limits<double>::infinity();
    return w;
  }
  // Large mass: the largest exponent p_N governs; small mass: the smallest p_1.
  // The small-mass branch is read as a power, like the large-mass one.
  const bool large = M_inf >= gamma;
  w.regime = large ? WaitingRegime::large_mass : WaitingRegime::small_mass;
  const double governing = large ? e.p[e.N - 1] : e.p[0];
  w.value = std::pow(M_inf / gamma, waiting_time_exponent(e, governing));
  return w;
}

double existence_time_isotropic(double M_inf, const ExponentSet& e, double C0) {
  const double p = e.p_iso();
  if (M_inf < 0.0) throw ValidationError("M_inf must be nonnegative");
  if (M_inf == 0.0) return std::numeric_limits<double>::infinity();
  return C0 * std::pow(M_inf, 2.0 - p);
}

} // namespace anisoflow
