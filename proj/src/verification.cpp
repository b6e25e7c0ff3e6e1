#include "anisoflow/verification.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "anisoflow/errors.hpp"

namespace anisoflow {

PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& samples) {
  PowerLawFit fit;
  for (const auto& [t, v] : samples) {
    if (t > 0.0 && v > 0.0) fit.samples.emplace_back(t, v);
  }
  const auto n = static_cast<double>(fit.samples.size());
  if (fit.samples.size() < 2) throw ValidationError("power-law fit needs at least two positive samples");
  double sx = 0.0, sy = 0.0;
  for (const auto& [t, v] : fit.samples) {
    sx += std::log(t);
    sy += std::log(v);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [t, v] : fit.samples) {
    const double dx = std::log(t) - mx, dy = std::log(v) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw ValidationError("power-law fit needs distinct sample times");
  fit.fitted_exponent = sxy / sxx;
  const double intercept = my - fit.fitted_exponent * mx;
  fit.fitted_constant = std::exp(intercept);
  double ss_res = 0.0;
  for (const auto& [t, v] : fit.samples) {
    const double r = std::log(v) - (intercept + fit.fitted_exponent * std::log(t));
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  return fit;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::skipped: return "skipped";
    case Verdict::not_applicable: return "not_applicable";
  }
  return "unknown";
}

bool VerificationReport::all_passed() const {
  return std::none_of(checks.begin(), checks.end(), [](const Check& c) { return c.verdict == Verdict::fail; });
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

} // namespace

nlohmann::json to_json(const VerificationReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const Check& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"target", number(c.target)},
                      {"measured", number(c.measured)},
                      {"tolerance", number(c.tolerance)},
                      {"verdict", to_string(c.verdict)},
                      {"reason", c.reason}});
  }
  return {{"checks", checks}, {"all_passed", report.all_passed()}};
}

nlohmann::json to_json(const PowerLawFit& fit) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& [t, v] : fit.samples) samples.push_back({t, v});
  return {{"fitted_exponent", fit.fitted_exponent},
          {"fitted_constant", fit.fitted_constant},
          {"r_squared", fit.r_squared},
          {"samples", samples}};
}

Check relative_check(std::string name, double target, double measured, double tolerance) {
  Check c;
  c.name = std::move(name);
  c.target = target;
  c.measured = measured;
  c.tolerance = tolerance;
  c.verdict = std::abs(measured - target) <= tolerance * std::abs(target) ? Verdict::pass : Verdict::fail;
  return c;
}

std::vector<const Snapshot*> post_transient(const Trajectory& trajectory) {
  const std::size_t n = trajectory.snapshots.size();
  const auto skip = static_cast<std::size_t>(std::floor(transient_fraction * static_cast<double>(n)));
  std::vector<const Snapshot*> kept;
  for (std::size_t k = skip; k < n; ++k) kept.push_back(&trajectory.snapshots[k]);
  return kept;
}

PowerLawFit fit_decay(const Trajectory& trajectory, const ExponentSet&) {
  const auto kept = post_transient(trajectory);
  if (kept.size() < 5) throw ValidationError("decay fit needs at least 5 outputs after the transient");
  if (kept.back()->field.time < 10.0 * kept.front()->field.time) {
    throw ValidationError("decay fit needs outputs spanning at least one decade in time");
  }
  std::vector<std::pair<double, double>> samples;
  for (const Snapshot* s : kept) samples.emplace_back(s->field.time, s->max_value);
  return fit_power_law(samples);
}

Check decay_check(const PowerLawFit& fit, const ExponentSet& e) {
  Check c = relative_check("decay exponent", -e.N / e.lambda(), fit.fitted_exponent, decay_tolerance);
  std::ostringstream os;
  os << "fit of max u(.,t) over " << fit.samples.size() << " outputs, r^2 = " << fit.r_squared;
  c.reason = os.str();
  return c;
}

PowerLawFit fit_support_growth(const Trajectory& trajectory, const ExponentSet& e, int axis,
                               std::optional<double> offset) {
  if (axis < 0 || axis >= e.N) throw ValidationError("axis out of range");
  for (const Snapshot& s : trajectory.snapshots) {
    if (s.near_boundary) throw ValidationError("support reached the grid boundary; growth fit is invalid");
  }
  const double shift = offset ? *offset : 2.0 * trajectory.initial_half_width[axis];
  const double h = trajectory.initial.grid.spacing(axis);
  std::vector<std::pair<double, double>> samples;
  for (const Snapshot* s : post_transient(trajectory)) {
    if (s->support.empty) continue;
    const double hw = s->support.half_width[axis];
    if (hw <= shift + 2.0 * h) continue;
    samples.emplace_back(s->field.time, hw - shift);
  }
  if (samples.size() < 3) throw ValidationError("support fit needs at least 3 usable outputs");
  return fit_power_law(samples);
}

Check support_check(const PowerLawFit& fit, const ExponentSet& e, int axis) {
  std::ostringstream name;
  name << "support exponent axis " << axis + 1;
  Check c = relative_check(name.str(), support_time_exponent(e, axis), fit.fitted_exponent, support_tolerance);
  std::ostringstream os;
  os << "fit over " << fit.samples.size() << " outputs, r^2 = " << fit.r_squared;
  c.reason = os.str();
  return c;
}

double trajectory_value(const Trajectory& trajectory, const Eigen::VectorXd& x, double t) {
  const auto& snaps = trajectory.snapshots;
  if (snaps.empty()) throw ValidationError("empty trajectory");
  const double t_first = snaps.front().field.time;
  const double t_last = snaps.back().field.time;
  const double slack = 1e-12 * std::max(1.0, std::abs(t_last));
  if (t < t_first - slack || t > t_last + slack) throw ValidationError("time outside the stored trajectory");
  auto upper = std::lower_bound(snaps.begin(), snaps.end(), t,
                                [](const Snapshot& s, double value) { return s.field.time < value; });
  if (upper == snaps.end()) return interpolate(snaps.back().field, x);
  if (upper->field.time == t || upper == snaps.begin()) return interpolate(upper->field, x);
  const auto lower = std::prev(upper);
  const double w = (t - lower->field.time) / (upper->field.time - lower->field.time);
  return (1.0 - w) * interpolate(lower->field, x) + w * interpolate(upper->field, x);
}

namespace {

// Nodal values at time t, linear in time between stored outputs.
Eigen::ArrayXd values_at(const Trajectory& trajectory, double t) {
  const auto& snaps = trajectory.snapshots;
  auto upper = std::lower_bound(snaps.begin(), snaps.end(), t,
                                [](const Snapshot& s, double value) { return s.field.time < value; });
  if (upper == snaps.end()) return snaps.back().field.values;
  if (upper->field.time == t || upper == snaps.begin()) return upper->field.values;
  const auto lower = std::prev(upper);
  const double w = (t - lower->field.time) / (upper->field.time - lower->field.time);
  return (1.0 - w) * lower->field.values + w * upper->field.values;
}

} // namespace

std::vector<HarnackCheck> check_harnack(const Trajectory& trajectory, const ExponentSet& e,
                                        const std::vector<HarnackPoint>& points, double rho,
                                        const std::vector<double>& C_grid) {
  const double p = e.p_iso();
  if (!(rho > 0.0)) throw ValidationError("Harnack check needs rho > 0");
  if (trajectory.snapshots.empty()) throw ValidationError("empty trajectory");
  const Grid& grid = trajectory.snapshots.front().field.grid;
  const double t_begin = trajectory.initial.time;
  const double t_last = trajectory.snapshots.back().field.time;

  std::vector<HarnackCheck> checks;
  for (const HarnackPoint& pt : points) {
    const double u_value = trajectory_value(trajectory, pt.x0, pt.t0);
    for (double C : C_grid) {
      HarnackCheck hc;
      hc.x0 = pt.x0;
      hc.t0 = pt.t0;
      hc.u_value = u_value;
      hc.rho = rho;
      hc.C_intrinsic = C;
      if (!(u_value > 0.0)) {
        hc.skipped = true;
        hc.reason = "u(x0,t0) = 0: the inequality assumes a positive value";
        checks.push_back(std::move(hc));
        continue;
      }
      hc.theta = C * std::pow(rho, p) / std::pow(u_value, p - 2.0);
      bool space_ok = true;
      for (int i = 0; i < grid.dim(); ++i) {
        space_ok = space_ok && std::abs(pt.x0[i]) + 4.0 * rho <= grid.half_width()[i];
      }
      const bool time_ok = pt.t0 - 4.0 * hc.theta >= t_begin && pt.t0 + 4.0 * hc.theta <= t_last;
      hc.cylinder_ok = space_ok && time_ok;
      if (!hc.cylinder_ok) {
        hc.skipped = true;
        hc.reason = space_ok ? "cylinder Q_4rho(theta) leaves the computed time range"
                             : "cylinder Q_4rho(theta) leaves the computed domain";
        checks.push_back(std::move(hc));
        continue;
      }
      const Eigen::ArrayXd later = values_at(trajectory, pt.t0 + hc.theta);
      double inf = std::numeric_limits<double>::infinity();
      for (Eigen::Index k = 0; k < grid.size(); ++k) {
        if ((grid.point(k) - pt.x0).norm() < rho) inf = std::min(inf, later[k]);
      }
      if (!std::isfinite(inf)) {
        hc.skipped = true;
        hc.reason = "no grid node strictly inside B_rho(x0)";
        checks.push_back(std::move(hc));
        continue;
      }
      hc.inf_value = inf;
      hc.gamma_required = inf > 0.0 ? u_value / inf : std::numeric_limits<double>::infinity();
      checks.push_back(std::move(hc));
    }
  }
  return checks;
}

HarnackConstants harnack_constants(const std::vector<HarnackCheck>& checks) {
  struct Acc {
    double worst = 0.0;
    int used = 0;
    int skipped = 0;
  };
  std::map<double, Acc> by_C;
  for (const HarnackCheck& c : checks) {
    Acc& a = by_C[c.C_intrinsic];
    if (c.skipped) {
      ++a.skipped;
      continue;
    }
    a.worst = std::max(a.worst, c.gamma_required);
    ++a.used;
  }
  int most_used = 0;
  for (const auto& [C, a] : by_C) most_used = std::max(most_used, a.used);
  HarnackConstants best;
  if (most_used == 0) return best;
  for (const auto& [C, a] : by_C) {
    if (a.used != most_used || !std::isfinite(a.worst)) continue;
    if (!best.found || a.worst < best.gamma) {
      best.found = true;
      best.gamma = a.worst;
      best.C = C;
      best.points_used = a.used;
    }
  }
  return best;
}

nlohmann::json to_json(const HarnackCheck& c) {
  return {{"x0", std::vector<double>(c.x0.data(), c.x0.data() + c.x0.size())},
          {"t0", c.t0},
          {"u_value", c.u_value},
          {"rho", c.rho},
          {"C", c.C_intrinsic},
          {"theta", c.theta},
          {"inf_value", c.inf_value},
          {"gamma_required", number(c.gamma_required)},
          {"cylinder_ok", c.cylinder_ok},
          {"skipped", c.skipped},
          {"reason", c.reason}};
}

Trajectory dilate_trajectory(const Trajectory& trajectory, double L, double T, double p) {
  if (!(L > 0.0 && T > 0.0 && p > 2.0)) throw ValidationError("dilation needs L, T > 0 and p > 2");
  const double K = std::pow(std::pow(L, p) / T, 1.0 / (p - 2.0));
  auto dilate = [&](const GridField& f) {
    const Grid g = f.grid.scaled(Eigen::VectorXd::Constant(f.grid.dim(), L));
    return GridField(g, K * f.values, T * f.time);
  };
  Trajectory out;
  out.initial = dilate(trajectory.initial);
  out.initial_half_width = L * trajectory.initial_half_width;
  for (const Snapshot& s : trajectory.snapshots) out.snapshots.push_back(make_snapshot(dilate(s.field)));
  out.log = trajectory.log;
  out.warnings = trajectory.warnings;
  return out;
}

VerificationReport check_apriori_estimates(const Trajectory& trajectory, const ExponentSet& e, double r,
                                           double u0_norm, double slack) {
  VerificationReport report;
  const double p_cap = e.p_bar * (1.0 + 1.0 / e.N);
  if (e.p.maxCoeff() > p_cap) {
    Check c;
    c.name = "hypothesis 2 < p_i <= p_bar (1 + 1/N)";
    c.target = p_cap;
    c.measured = e.p.maxCoeff();
    c.verdict = Verdict::not_applicable;
    c.reason = "exponent range outside the estimate's hypothesis";
    report.add(c);
    return report;
  }
  const auto kept = post_transient(trajectory);
  if (kept.empty()) throw ValidationError("estimates need at least one output");
  for (const Snapshot& s : trajectory.snapshots) {
    if (s.field.values.minCoeff() < 0.0) throw ValidationError("estimates need a nonnegative trajectory");
  }

  const NormKind kind = e.isotropic() ? NormKind::isotropic : NormKind::anisotropic;
  const double a = e.isotropic() ? e.p_iso() / (e.p_iso() - 2.0) : e.p_bar / e.N;
  const double b = e.isotropic() ? e.p_iso() / e.lambda() : e.p_bar / e.lambda();
  const Grid& grid = kept.front()->field.grid;
  const Eigen::VectorXd box = anisotropic_box_half_widths(e, r);
  auto in_ball = [&](const Eigen::VectorXd& x) {
    if (kind == NormKind::isotropic) return x.norm() <= r;
    return (x.array().abs() <= box.array()).all();
  };

  std::vector<double> ratio1, ratio2;
  for (const Snapshot* s : kept) {
    const double lhs1 = triple_norm(s->field, r, kind, e).value;
    double sup = 0.0;
    for (Eigen::Index k = 0; k < grid.size(); ++k) {
      if (in_ball(grid.point(k))) sup = std::max(sup, s->field.values[k]);
    }
    const double t = s->field.time;
    const double rhs2 = std::pow(r, a) * std::pow(t, -e.N / e.lambda()) * std::pow(u0_norm, b);
    ratio1.push_back(u0_norm > 0.0 ? lhs1 / u0_norm : (lhs1 > 0.0 ? INFINITY : 0.0));
    ratio2.push_back(rhs2 > 0.0 ? sup / rhs2 : (sup > 0.0 ? INFINITY : 0.0));
  }

  auto summarize = [&](const std::string& name, const std::vector<double>& ratios) {
    Check c;
    c.name = name;
    c.target = ratios.front();
    c.measured = *std::max_element(ratios.begin(), ratios.end());
    c.tolerance = slack;
    const bool holds = c.measured <= c.target * (1.0 + slack) || c.measured == 0.0;
    c.verdict = std::isfinite(c.target) && holds ? Verdict::pass : Verdict::fail;
    std::ostringstream os;
    os << "C fitted at t = " << kept.front()->field.time << "; largest ratio over " << ratios.size()
       << " outputs";
    c.reason = os.str();
    return c;
  };
  report.add(summarize(e.isotropic() ? "growth norm bound |||u(t)|||_r <= C |||u0|||_r (isotropic)"
                                     : "growth norm bound |||u(t)|||_r <= C |||u0|||_r",
                       ratio1));
  report.add(summarize(e.isotropic() ? "sup bound on B_r (isotropic)" : "sup bound on B_r", ratio2));
  return report;
}

VerificationReport check_apriori_estimates(const Trajectory& trajectory, const ExponentSet& e, double r,
                                           double slack) {
  const NormKind kind = e.isotropic() ? NormKind::isotropic : NormKind::anisotropic;
  const double u0_norm = triple_norm(trajectory.initial, r, kind, e).value;
  return check_apriori_estimates(trajectory, e, r, u0_norm, slack);
}

double error_vs_exact(const GridField& numerical, const Evaluator& exact, NormType norm) {
  const GridField reference = sample(numerical.grid, exact, numerical.time);
  const Eigen::ArrayXd diff = (numerical.values - reference.values).abs();
  if (norm == NormType::Linf) return diff.size() > 0 ? diff.maxCoeff() : 0.0;
  return diff.sum() * numerical.grid.cell_volume();
}

double relative_error_vs_exact(const GridField& numerical, const Evaluator& exact, NormType norm) {
  const GridField reference = sample(numerical.grid, exact, numerical.time);
  const double scale = norm == NormType::Linf ? reference.values.abs().maxCoeff() : l1_norm(reference);
  if (!(scale > 0.0)) throw ValidationError("exact solution vanishes on the grid");
  return error_vs_exact(numerical, exact, norm) / scale;
}

std::string svg_loglog(const PowerLawFit& fit, double target_slope, const std::string& title) {
  constexpr double width = 640.0, height = 480.0, margin = 60.0;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& [t, v] : fit.samples) {
    x0 = std::min(x0, std::log10(t));
    x1 = std::max(x1, std::log10(t));
    y0 = std::min(y0, std::log10(v));
    y1 = std::max(y1, std::log10(v));
  }
  if (fit.samples.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  const double fit_log_c = std::log10(fit.fitted_constant);
  auto fitted = [&](double lx) { return fit_log_c + fit.fitted_exponent * lx; };
  auto target = [&](double lx) { return cy + target_slope * (lx - cx); };
  for (double lx : {x0, x1}) {
    y0 = std::min({y0, fitted(lx), target(lx)});
    y1 = std::max({y1, fitted(lx), target(lx)});
  }
  if (x1 - x0 < 1e-12) x1 = x0 + 1.0;
  if (y1 - y0 < 1e-12) y1 = y0 + 1.0;
  auto px = [&](double lx) { return margin + (lx - x0) / (x1 - x0) * (width - 2 * margin); };
  auto py = [&](double ly) { return height - margin - (ly - y0) / (y1 - y0) * (height - 2 * margin); };

  std::string out;
  char buf[256];
  auto emit = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
  };
  emit("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n", width, height);
  emit("<rect x=\"0\" y=\"0\" width=\"%.0f\" height=\"%.0f\" fill=\"white\"/>\n", width, height);
  out += "<text x=\"60\" y=\"30\" font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
  emit("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", margin, height - margin,
       width - margin, height - margin);
  emit("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"black\"/>\n", margin, margin, margin,
       height - margin);
  emit("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\">log10 t: %.3g .. %.3g</text>\n",
       width / 2 - 60, height - 20, x0, x1);
  emit("<text x=\"10\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\">log10 value: %.3g .. %.3g</text>\n",
       margin - 10, y0, y1);
  emit("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"steelblue\" stroke-width=\"2\"/>\n",
       px(x0), py(fitted(x0)), px(x1), py(fitted(x1)));
  emit("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"firebrick\" stroke-dasharray=\"6,4\"/>\n",
       px(x0), py(target(x0)), px(x1), py(target(x1)));
  for (const auto& [t, v] : fit.samples) {
    emit("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"3\" fill=\"black\"/>\n", px(std::log10(t)), py(std::log10(v)));
  }
  emit("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\" fill=\"steelblue\">fitted slope %.6g</text>\n",
       width - 260, margin + 10, fit.fitted_exponent);
  emit("<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\" fill=\"firebrick\">target slope %.6g</text>\n",
       width - 260, margin + 28, target_slope);
  out += "</svg>\n";
  return out;
}

} // namespace anisoflow
