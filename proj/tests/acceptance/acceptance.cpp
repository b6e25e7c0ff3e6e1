// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "anisoflow/errors.hpp"
#include "anisoflow/exact_solutions.hpp"
#include "anisoflow/fokker_planck.hpp"
#include "anisoflow/pde_solver.hpp"
#include "anisoflow/scaling_laws.hpp"
#include "anisoflow/verification.hpp"
#include "oracles.hpp"

using namespace anisoflow;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED(" << what << ")";
    }
  }
};

double relative_l1(const GridField& a, const GridField& b) {
  return l1_norm(GridField(a.grid, a.values - b.values, 0.0)) / l1_norm(b);
}

Outcome exact_suite() {
  Outcome o;
  double worst_residual = 0.0;
  for (int N : {1, 2, 3}) {
    for (double p : {2.5, 3.0, 4.0, 6.0}) {
      const ExponentSet e = isotropic_exponents(N, p);
      const double R = profile_support_radius(e);
      for (int k = 0; k < 1000; ++k) worst_residual = std::max(worst_residual, std::abs(zero_flux_residual(R * k / 1000.0, e)));
    }
  }
  o.require(worst_residual < 1e-10, "zero-flux residual");

  double worst_sup = 0.0;
  auto gen = oracle::rng(101);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (int N : {1, 2, 3}) {
    const ExponentSet e = isotropic_exponents(N, 3.0);
    for (double t : {0.5, 1.0, 4.0}) {
      const double expected = std::pow(t, -N / e.lambda());
      double sup = barenblatt(Eigen::VectorXd::Zero(N), t, e);
      for (int k = 0; k < 200; ++k) {
        Eigen::VectorXd x(N);
        for (int i = 0; i < N; ++i) x[i] = 3.0 * ud(gen);
        sup = std::max(sup, barenblatt(x, t, e));
      }
      worst_sup = std::max(worst_sup, std::abs(sup - expected) / expected);
    }
  }
  o.require(worst_sup <= 1e-12, "sup identity");

  double worst_similarity = 0.0;
  std::uniform_real_distribution<double> tdist(0.2, 5.0);
  for (int N : {1, 2, 3}) {
    const ExponentSet e = isotropic_exponents(N, 3.5);
    const Evaluator B = barenblatt_evaluator(e);
    for (int k = 0; k < 100; ++k) {
      const Dilation d = mass_preserving_dilation(tdist(gen), e);
      const Evaluator S = apply_scaling(B, d.K, d.L, d.T);
      Eigen::VectorXd x(N);
      for (int i = 0; i < N; ++i) x[i] = 2.0 * ud(gen);
      const double t = tdist(gen);
      worst_similarity = std::max(worst_similarity, std::abs(S(x, t) - B(x, t)));
    }
  }
  o.require(worst_similarity < 1e-10, "self-similarity");

  bool monotone = true;
  double previous = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd one = Eigen::VectorXd::Constant(1, 1.0);
  for (double p : {3.0, 2.5, 2.1, 2.01}) {
    const double gap = heat_limit_gap(one, 1.0, p);
    monotone = monotone && gap < previous;
    previous = gap;
  }
  o.require(monotone, "heat limit");

  const HarnackFailureWitness w = harnack_failure_witness(isotropic_exponents(1, 3.0), 0.5);
  o.require(w.value_at_x0 == 0.0 && w.sampled_sup > 0.0, "witness");

  o.detail << "max residual " << worst_residual << ", sup error " << worst_sup << ", similarity error "
           << worst_similarity << ", heat gap monotone " << (monotone ? "yes" : "no") << ", witness B(x0)="
           << w.value_at_x0 << " sup=" << w.sampled_sup;
  return o;
}

Outcome scaling_suite() {
  Outcome o;
  auto gen = oracle::rng(102);
  std::uniform_int_distribution<int> nd(1, 8);
  std::uniform_real_distribution<double> pd(2.05, 12.0);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const ExponentSet e = isotropic_exponents(nd(gen), pd(gen));
    for (int i = 0; i < e.N; ++i) worst = std::max(worst, std::abs(e.alpha[i] * e.lambda() + 1.0));
  }
  // a few ulps of the O(1) quantities entering beta - (1 + 2 beta)/p
  o.require(worst <= 8 * std::numeric_limits<double>::epsilon(), "isotropic collapse");
  const double lam = isotropic_exponents(2, 3.0).lambda();
  const double gam = *isotropic_exponents(1, 3.0).gamma_p;
  const double pbar = build_exponent_set({3.0, 4.0, 6.0}).p_bar;
  o.require(std::abs(lam - 5.0) < 1e-14, "lambda");
  o.require(std::abs(gam - 1.0 / 6.0) < 1e-15, "gamma_p");
  o.require(std::abs(pbar - 4.0) < 1e-14, "p_bar");
  o.detail << "max |alpha lambda + 1| " << worst << ", lambda " << lam << ", gamma_p " << gam << ", p_bar " << pbar;
  return o;
}

Outcome solver_vs_exact() {
  Outcome o;
  const ExponentSet e = isotropic_exponents(1, 3.0);
  std::vector<double> errors;
  double drift = 0.0;
  for (int nodes : {401, 801}) {
    SimConfig c;
    c.e = e;
    c.grid = Grid::uniform(1, 6.0, nodes);
    c.initial = BarenblattSnapshot{1.0};
    c.t_end = 2.0;
    c.output_times = geometric_times(1.0, 2.0, 11);
    const Trajectory t = run(c);
    const double m0 = mass(t.initial);
    for (const Snapshot& s : t.snapshots) drift = std::max(drift, std::abs(s.mass - m0) / m0);
    errors.push_back(relative_error_vs_exact(t.snapshots.back().field, barenblatt_evaluator(e), NormType::L1));
  }
  const double order = std::log2(errors[0] / errors[1]);
  o.require(errors[1] < 0.05, "L1 error");
  o.require(order >= 0.8, "order");
  o.require(drift < 1e-10, "mass drift");
  o.detail << "relative L1 error 401: " << errors[0] << ", 801: " << errors[1] << ", order " << order
           << ", max mass drift " << drift;
  return o;
}

struct AnisoRun {
  Trajectory trajectory;
  ExponentSet e;
};

AnisoRun anisotropic_dirac_run() {
  SimConfig c;
  c.e = build_exponent_set({3.0, 4.0});
  c.grid = Grid(Eigen::Vector2d(5.5, 3.0), Eigen::Vector2i(257, 257));
  c.initial = DiracApprox{1.0, 0.1};
  c.t_end = 10.0;
  c.output_times = geometric_times(0.1, 10.0, 25);
  return {run(c), c.e};
}

Outcome decay_law(const AnisoRun& aniso) {
  Outcome o;
  SimConfig c;
  c.e = isotropic_exponents(1, 3.0);
  c.grid = Grid::uniform(1, 7.7, 801);
  c.initial = DiracApprox{1.0, 0.0};
  c.t_end = 10.0;
  c.output_times = geometric_times(0.1, 10.0, 25);
  const Trajectory t = run(c);
  const PowerLawFit f1 = fit_decay(t, c.e);
  const Check c1 = decay_check(f1, c.e);
  const PowerLawFit f2 = fit_decay(aniso.trajectory, aniso.e);
  const Check c2 = decay_check(f2, aniso.e);
  o.require(c1.verdict == Verdict::pass, "isotropic");
  o.require(c2.verdict == Verdict::pass, "anisotropic");
  o.detail << "N=1 p=3: " << f1.fitted_exponent << " vs " << c1.target << " (r2 " << f1.r_squared
           << "); N=2 p=(3,4): " << f2.fitted_exponent << " vs " << c2.target << " (r2 " << f2.r_squared << ")";
  return o;
}

Outcome finite_propagation(const AnisoRun& aniso) {
  Outcome o;
  std::vector<double> fitted;
  for (int j = 0; j < 2; ++j) {
    const PowerLawFit f = fit_support_growth(aniso.trajectory, aniso.e, j);
    const Check c = support_check(f, aniso.e, j);
    o.require(c.verdict == Verdict::pass, "axis " + std::to_string(j + 1));
    fitted.push_back(f.fitted_exponent);
    const PowerLawFit raw = fit_support_growth(aniso.trajectory, aniso.e, j, 0.0);
    o.detail << "axis " << j + 1 << ": " << f.fitted_exponent << " vs " << c.target << " (no offset "
             << raw.fitted_exponent << "); ";
  }
  o.require(fitted[0] > fitted[1], "ordering");
  o.detail << "smaller p grows faster: " << (fitted[0] > fitted[1] ? "yes" : "no");
  return o;
}

Outcome fokker_planck_construction() {
  Outcome o;
  const ExponentSet iso = isotropic_exponents(1, 3.0);
  const Grid g = Grid::uniform(1, 3.5, 401);
  const auto [w, verdict] = evolve_to_stationary(RescaledField{bump(g, 1.0, 1.0), 0.0}, iso, StationaryOptions{});
  // C(|y|) carried to mass 1 through the scaling group, written out independently
  const double RC = std::pow(6.0, 2.0 / 3.0);
  const double MC = 0.9 * RC;
  const double L = std::pow(1.0 / MC, 0.25);
  const double K = std::pow(L, 3.0);
  const GridField target = sample(g, [&](const Eigen::VectorXd& y, double) {
    const double b = 1.0 - std::pow(std::abs(y[0]) / L, 1.5) / 6.0;
    return b > 0.0 ? K * b * b : 0.0;
  }, 0.0);
  const double distance = relative_l1(w.field, target);
  const double mass_error = std::abs(mass(w.field) - 1.0);
  o.require(verdict.converged, "isotropic convergence");
  o.require(distance < 0.05, "distance to profile");
  o.require(mass_error < 1e-10, "mass");

  std::vector<double> residuals;
  for (int n : {101, 201, 401, 801}) {
    const Grid gn = Grid::uniform(1, 3.5, n);
    residuals.push_back(steady_residual(
        sample(gn, [&](const Eigen::VectorXd& y, double) { return profile(std::abs(y[0]), iso).value; }, 0.0), iso));
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < residuals.size(); ++k) decreasing = decreasing && residuals[k] < residuals[k - 1];
  o.require(decreasing, "residual refinement");

  const ExponentSet an = build_exponent_set({3.0, 4.0});
  const Grid ga(Eigen::Vector2d(3.0, 2.4), Eigen::Vector2i(129, 129));
  const auto [wa, va] = evolve_to_stationary(RescaledField{warm_start(ga, an, 1.0), 0.0}, an, StationaryOptions{});
  const SupportBox box = support_box_relative(wa.field);
  const double extent_ratio = box.half_width[0] / box.half_width[1];
  o.require(va.converged && va.final_residual < va.residual_tolerance, "anisotropic convergence");
  o.require(extent_ratio > 1.1 || extent_ratio < 1.0 / 1.1, "distinct extents");
  o.require(box.cells_to_boundary(ga) > 0, "anisotropic support interior");

  o.detail << "isotropic: converged at tau " << verdict.tau_reached << ", L1 distance " << distance << ", mass error "
           << mass_error << "; residual under refinement";
  for (double r : residuals) o.detail << ' ' << r;
  o.detail << "; anisotropic: converged " << (va.converged ? "yes" : "no") << " at tau " << va.tau_reached
           << ", residual " << va.final_residual << " (tol " << va.residual_tolerance << "), extents "
           << box.half_width[0] << " / " << box.half_width[1];
  return o;
}

Outcome harnack() {
  Outcome o;
  const ExponentSet e = isotropic_exponents(1, 3.0);
  const Trajectory t =
      sample_trajectory(Grid::uniform(1, 8.0, 1601), barenblatt_evaluator(e), geometric_times(0.5, 6.0, 60));
  std::vector<HarnackPoint> pts;
  for (double x : {0.0, 0.3, -0.6, 0.9, -1.2}) pts.push_back({Eigen::VectorXd::Constant(1, x), 1.5});
  for (double x : {0.0, 0.5, -1.0, 1.4, -1.8}) pts.push_back({Eigen::VectorXd::Constant(1, x), 2.0});
  const double rho = 0.25;
  const std::vector<double> Cs{0.05, 0.1, 0.2, 0.4, 0.8};
  const HarnackConstants k = harnack_constants(check_harnack(t, e, pts, rho, Cs));
  o.require(k.found && k.points_used == 10 && std::isfinite(k.gamma), "finite pair at 10 points");

  const double L = 2.0, T = 3.0;
  const Trajectory d = dilate_trajectory(t, L, T, 3.0);
  std::vector<HarnackPoint> moved;
  for (const HarnackPoint& p : pts) moved.push_back({L * p.x0, T * p.t0});
  const HarnackConstants kd = harnack_constants(check_harnack(d, e, moved, L * rho, Cs));
  const double rel = std::abs(kd.gamma - k.gamma) / k.gamma;
  o.require(kd.found && rel <= 0.01, "scaling invariance");
  o.detail << "gamma " << k.gamma << " with C " << k.C << " at " << k.points_used << " points; after dilation (L="
           << L << ", T=" << T << ") gamma " << kd.gamma << ", relative change " << rel;
  return o;
}

Outcome comparison() {
  Outcome o;
  const ExponentSet e = isotropic_exponents(1, 3.0);
  const Grid g = Grid::uniform(1, 1.0, 101);
  auto gen = oracle::rng(108);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  int violations = 0;
  for (int pair = 0; pair < 50; ++pair) {
    GridField u(g, 0.0), v(g, 0.0);
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      u.values[k] = ud(gen);
      v.values[k] = u.values[k] + 0.5 * ud(gen);
    }
    for (int s = 0; s < 100; ++s) {
      const double dt = std::min(stable_dt(u, e, 0.9, 1.0), stable_dt(v, e, 0.9, 1.0));
      u = step(u, e, dt).first;
      v = step(v, e, dt).first;
    }
    if (!(u.values <= v.values).all()) ++violations;
  }
  o.require(violations == 0, "ordering");
  o.detail << "50 pairs x 100 steps, violations " << violations;
  return o;
}

using Clock = std::chrono::steady_clock;

bool report(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& ex) {
    o.pass = false;
    o.detail << "exception: " << ex.what();
  }
  const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("criterion %d %s %s (%.1f s): %s\n", id, o.pass ? "PASS" : "FAIL", title.c_str(), seconds,
              o.detail.str().c_str());
  std::fflush(stdout);
  return o.pass;
}

} // namespace

int main() {
  bool all = true;
  all &= report(1, "exact-solution suite", exact_suite);
  all &= report(2, "scaling algebra", scaling_suite);
  all &= report(3, "solver vs exact", solver_vs_exact);
  AnisoRun aniso;
  const auto start = Clock::now();
  try {
    aniso = anisotropic_dirac_run();
  } catch (const std::exception& ex) {
    std::printf("anisotropic run failed: %s\n", ex.what());
  }
  const double run_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("shared N=2, p=(3,4) point-mass run on 257x257: %.1f s\n", run_seconds);
  all &= report(4, "decay law", [&] { return decay_law(aniso); });
  all &= report(5, "anisotropic finite propagation", [&] { return finite_propagation(aniso); });
  all &= report(6, "Fokker-Planck construction", fokker_planck_construction);
  all &= report(7, "Harnack", harnack);
  all &= report(8, "comparison principle", comparison);
  std::printf("%s\n", all ? "ALL CRITERIA PASS" : "SOME CRITERIA FAIL");
  return all ? 0 : 1;
}
