#include "anisoflow/cli.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "anisoflow/errors.hpp"
#include "anisoflow/exact_solutions.hpp"
#include "anisoflow/fokker_planck.hpp"
#include "anisoflow/pde_solver.hpp"
#include "anisoflow/scaling_laws.hpp"
#include "anisoflow/verification.hpp"

namespace anisoflow::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

struct Outputs {
  fs::path dir;
  json files = json::array();
  json summary = json::object();
  bool quiet = true;

  fs::path add(const std::string& name, const std::string& role) {
    files.push_back({{"path", name}, {"role", role}});
    return dir / name;
  }
  void log(const std::string& line) const {
    if (!quiet) std::cerr << line << '\n';
  }
};

// JSON numbers cannot be inf/nan; those go out as strings.
json number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v[i]));
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write " + path.string());
  os << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

void write_csv(const fs::path& path, const GridField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write " + path.string());
  const Grid& g = f.grid;
  for (int i = 0; i < g.dim(); ++i) os << 'x' << i + 1 << ',';
  os << "value\n";
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const Eigen::VectorXd x = g.point(k);
    for (int i = 0; i < g.dim(); ++i) os << format_number(x[i]) << ',';
    os << format_number(f.values[k]) << '\n';
  }
}

// Values of a CSV written by write_csv, checked against `grid`.
Eigen::ArrayXd read_csv(const fs::path& path, const Grid& grid) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot read " + path.string());
  std::string line;
  std::getline(is, line);
  Eigen::ArrayXd values(grid.size());
  Eigen::Index k = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (k >= grid.size()) throw ValidationError("CSV has more rows than the grid has nodes");
    std::vector<double> cols;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      double v = 0.0;
      const auto res = std::from_chars(line.data() + start, line.data() + end, v);
      if (res.ec != std::errc()) throw ValidationError("malformed CSV number in " + path.string());
      cols.push_back(v);
      start = end + 1;
    }
    if (static_cast<int>(cols.size()) != grid.dim() + 1) throw ValidationError("CSV column count does not match the grid");
    const Eigen::VectorXd x = grid.point(k);
    for (int i = 0; i < grid.dim(); ++i) {
      if (std::abs(cols[static_cast<std::size_t>(i)] - x[i]) > 1e-9 * (1.0 + grid.half_width()[i])) {
        throw ValidationError("CSV coordinates do not match the configured grid");
      }
    }
    values[k++] = cols.back();
  }
  if (k != grid.size()) throw ValidationError("CSV has fewer rows than the grid has nodes");
  return values;
}

const json& section(const json& config, const char* name) {
  static const json empty = json::object();
  auto it = config.find(name);
  if (it == config.end()) return empty;
  if (!it->is_object()) throw ValidationError(std::string("config section '") + name + "' must be an object");
  return *it;
}

ExponentSet read_exponents(const json& config) {
  if (!config.contains("p")) throw ValidationError("config needs the exponent list 'p'");
  const json& p = config.at("p");
  if (p.is_number()) {
    if (!config.contains("N")) throw ValidationError("a scalar 'p' needs the dimension 'N'");
    return isotropic_exponents(config.at("N").get<int>(), p.get<double>());
  }
  const auto values = p.get<std::vector<double>>();
  const int N = config.value("N", static_cast<int>(values.size()));
  if (values.empty()) throw ValidationError("'p' must not be empty");
  return build_exponent_set(N, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

Eigen::VectorXd per_axis(const json& j, int N, const char* name) {
  Eigen::VectorXd out(N);
  if (j.is_number()) {
    out.setConstant(j.get<double>());
    return out;
  }
  const auto v = j.get<std::vector<double>>();
  if (static_cast<int>(v.size()) != N) throw ValidationError(std::string("'") + name + "' needs one entry per axis");
  for (int i = 0; i < N; ++i) out[i] = v[static_cast<std::size_t>(i)];
  return out;
}

Grid read_grid(const json& config, int N) {
  const json& g = section(config, "grid");
  if (!g.contains("half_width") || !g.contains("nodes")) throw ValidationError("'grid' needs half_width and nodes");
  const Eigen::VectorXd hw = per_axis(g.at("half_width"), N, "half_width");
  const Eigen::VectorXd nodes = per_axis(g.at("nodes"), N, "nodes");
  return Grid(hw, nodes.cast<int>());
}

json grid_json(const Grid& g) {
  json nodes = json::array();
  for (int i = 0; i < g.dim(); ++i) nodes.push_back(g.nodes()[i]);
  return {{"half_width", vector_json(g.half_width())}, {"nodes", nodes}, {"spacing", vector_json(g.spacings())}};
}

json exponents_json(const ExponentSet& e) {
  json j = {{"N", e.N},
            {"p", vector_json(e.p)},
            {"p_bar", e.p_bar},
            {"lambda", e.lambda()},
            {"beta", e.beta},
            {"alpha", vector_json(e.alpha)},
            {"isotropic", e.isotropic()}};
  j["p_star"] = e.p_star ? json(*e.p_star) : json(nullptr);
  j["gamma_p"] = e.gamma_p ? json(*e.gamma_p) : json(nullptr);
  json support = json::array();
  for (int i = 0; i < e.N; ++i) support.push_back(support_time_exponent(e, i));
  j["support_time_exponents"] = support;
  j["decay_exponent"] = -e.N / e.lambda();
  return j;
}

std::vector<double> read_times(const json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  if (j.is_object() && j.contains("geometric")) {
    const json& g = j.at("geometric");
    return geometric_times(g.at("from").get<double>(), g.at("to").get<double>(), g.at("count").get<int>());
  }
  throw ValidationError("times must be a list or {\"geometric\": {from, to, count}}");
}

SimConfig read_sim_config(const json& config, const ExponentSet& e, const Grid& grid) {
  const json& s = section(config, "simulate");
  SimConfig c;
  c.e = e;
  c.grid = grid;
  c.t_end = s.value("t_end", 1.0);
  c.cfl = s.value("cfl", 0.9);
  c.dt_max = s.value("dt_max", 1e-2);
  c.support_threshold = s.value("support_threshold", 1e-10);
  c.negativity_tolerance = s.value("negativity_tolerance", 1e-12);
  c.support_constant = s.value("support_constant", 1.0);
  if (s.contains("output_times")) c.output_times = read_times(s.at("output_times"));

  const json& init = s.contains("initial") ? s.at("initial") : json{{"type", "dirac"}};
  const std::string type = init.value("type", "dirac");
  if (type == "dirac") {
    c.initial = DiracApprox{init.value("mass", 1.0), init.value("radius", 0.0)};
  } else if (type == "barenblatt") {
    c.initial = BarenblattSnapshot{init.value("t_start", 1.0)};
  } else if (type == "separable") {
    if (!init.contains("T")) throw ValidationError("separable datum needs blow-up times 'T'");
    c.initial = SeparableSnapshot{make_separable_params(e, per_axis(init.at("T"), e.N, "T")), init.value("t_start", 0.0)};
  } else if (type == "zero") {
    c.initial = CustomDatum{Eigen::ArrayXd::Zero(grid.size()), init.value("t_start", 0.0)};
  } else if (type == "custom") {
    if (!init.contains("file")) throw ValidationError("custom datum needs 'file'");
    c.initial = CustomDatum{read_csv(init.at("file").get<std::string>(), grid), init.value("t_start", 0.0)};
  } else {
    throw ValidationError("unknown initial datum type '" + type + "'");
  }
  return c;
}

json snapshot_json(const Snapshot& s) {
  json j = {{"time", s.field.time}, {"mass", s.mass}, {"max", s.max_value}, {"near_boundary", s.near_boundary}};
  if (s.support.empty) {
    j["support_half_width"] = nullptr;
  } else {
    j["support_half_width"] = vector_json(s.support.half_width);
  }
  return j;
}

json stats_json(const StepStats& s) {
  return {{"steps", s.steps},
          {"dt_last", s.dt},
          {"dt_min", s.dt_min},
          {"max_diffusivity", s.max_diffusivity},
          {"mass_before", s.mass_before},
          {"mass_after", s.mass_after},
          {"max_relative_mass_drift", s.max_relative_mass_drift},
          {"min_value", s.min_value}};
}

json trajectory_json(const Trajectory& t) {
  json outputs = json::array();
  for (const Snapshot& s : t.snapshots) outputs.push_back(snapshot_json(s));
  json log = json::array();
  for (const StepStats& s : t.log) log.push_back(stats_json(s));
  return {{"initial_time", t.initial.time},
          {"initial_mass", mass(t.initial)},
          {"initial_half_width", vector_json(t.initial_half_width)},
          {"outputs", outputs},
          {"step_log", log},
          {"warnings", t.warnings}};
}

Trajectory simulate(const json& config, const ExponentSet& e, const Grid& grid, Outputs& out) {
  const SimConfig c = read_sim_config(config, e, grid);
  out.log("simulating to t = " + format_number(c.t_end));
  Trajectory t = run(c);
  for (const std::string& w : t.warnings) out.log("warning: " + w);
  return t;
}

void cmd_exponents(const json& config, Outputs& out) {
  const ExponentSet e = read_exponents(config);
  json j = exponents_json(e);
  const BoundednessReport b = check_boundedness_condition(e);
  j["boundedness"] = {{"holds", b.holds},
                      {"p_bar_below_dimension", b.p_bar_below_dimension},
                      {"max_below_p_star", b.max_below_p_star},
                      {"failed", b.failed}};
  const double cap = e.p_bar * (1.0 + 1.0 / e.N);
  j["estimate_hypothesis"] = {{"cap", cap}, {"holds", e.p.maxCoeff() <= cap}};
  write_json(out.add("exponents.json", "exponent set and condition checks"), j);
  out.summary = {{"boundedness_holds", b.holds}};
}

void cmd_exact(const json& config, Outputs& out) {
  const ExponentSet e = read_exponents(config);
  const Grid grid = read_grid(config, e.N);
  const json& s = section(config, "exact");
  const std::string solution = s.value("solution", "barenblatt");
  const double t = s.value("t", 1.0);
  json header = {{"solution", solution}, {"t", t}, {"exponents", exponents_json(e)}, {"grid", grid_json(grid)}};

  Evaluator u;
  if (solution == "barenblatt") {
    u = barenblatt_evaluator(e);
    header["support_radius"] = barenblatt_support_radius(t, e);
  } else if (solution == "general_barenblatt") {
    Eigen::VectorXd xbar = s.contains("x_bar") ? per_axis(s.at("x_bar"), e.N, "x_bar") : Eigen::VectorXd::Zero(e.N);
    const BarenblattParams params =
        make_barenblatt_params(s.value("k", 1.0), s.value("rho", 1.0), xbar, s.value("t_bar", 0.0), e);
    u = [params](const Eigen::VectorXd& x, double time) { return general_barenblatt(params, x, time); };
    header["S"] = support_S(params, t);
    header["support_radius"] = std::pow(support_S(params, t), 1.0 / e.lambda());
  } else if (solution == "separable") {
    if (!s.contains("T")) throw ValidationError("separable solution needs blow-up times 'T'");
    const SeparableParams params = make_separable_params(e, per_axis(s.at("T"), e.N, "T"));
    u = [params](const Eigen::VectorXd& x, double time) { return separable_solution(params, x, time); };
    header["kappa"] = vector_json(params.kappa);
  } else if (solution == "profile") {
    u = [e](const Eigen::VectorXd& y, double) { return profile(y.norm(), e).value; };
    const double R = profile_support_radius(e);
    const int samples = s.value("residual_samples", 1000);
    double worst = 0.0;
    for (int k = 0; k < samples; ++k) worst = std::max(worst, std::abs(zero_flux_residual(R * k / samples, e)));
    header["support_radius"] = R;
    header["max_zero_flux_residual"] = worst;
    header["residual_samples"] = samples;
    out.summary["max_zero_flux_residual"] = worst;
  } else if (solution == "stationary") {
    u = stationary_profile(e, s.value("mass", 1.0));
    header["mass"] = s.value("mass", 1.0);
  } else if (solution == "heat") {
    u = heat_kernel;
  } else {
    throw ValidationError("unknown exact solution '" + solution + "'");
  }

  const GridField f = sample(grid, u, t);
  header["discrete_mass"] = mass(f);
  header["max"] = f.values.maxCoeff();
  write_csv(out.add("field.csv", "sampled exact solution"), f);
  write_json(out.add("field.json", "parameters of the sampled solution"), header);
}

void cmd_simulate(const json& config, Outputs& out) {
  const ExponentSet e = read_exponents(config);
  const Grid grid = read_grid(config, e.N);
  const Trajectory t = simulate(config, e, grid, out);
  json j = trajectory_json(t);
  j["exponents"] = exponents_json(e);
  j["grid"] = grid_json(grid);
  json files = json::array();
  for (std::size_t k = 0; k < t.snapshots.size(); ++k) {
    std::ostringstream name;
    name << "u_" << std::setw(4) << std::setfill('0') << k << ".csv";
    write_csv(out.add(name.str(), "field at t = " + format_number(t.snapshots[k].field.time)), t.snapshots[k].field);
    files.push_back(name.str());
  }
  j["fields"] = files;
  write_json(out.add("trajectory.json", "per-output diagnostics and step log"), j);
  double drift = 0.0;
  for (const StepStats& s : t.log) drift = std::max(drift, s.max_relative_mass_drift);
  out.summary = {{"outputs", t.snapshots.size()}, {"warnings", t.warnings.size()}, {"max_relative_mass_drift", drift}};
}

void cmd_steady(const json& config, Outputs& out) {
  const ExponentSet e = read_exponents(config);
  const Grid grid = read_grid(config, e.N);
  const json& s = section(config, "steady");
  const std::string start = s.value("start", e.isotropic() ? "bump" : "warm_start");
  const double m = s.value("mass", 1.0);
  GridField w0;
  if (start == "bump") {
    w0 = bump(grid, s.value("radius", 1.0), m);
  } else if (start == "warm_start") {
    w0 = warm_start(grid, e, m);
  } else if (start == "profile") {
    w0 = sample(grid, stationary_profile(e, m), 0.0);
  } else if (start == "file") {
    w0 = GridField(grid, read_csv(s.at("file").get<std::string>(), grid), 0.0);
  } else {
    throw ValidationError("unknown steady start '" + start + "'");
  }
  StationaryOptions opt;
  opt.tol = s.value("tol", opt.tol);
  opt.residual_tol = s.value("residual_tol", opt.residual_tol);
  opt.tau_max = s.value("tau_max", opt.tau_max);
  opt.cfl = s.value("cfl", opt.cfl);
  out.log("marching the rescaled equation, tau_max = " + format_number(opt.tau_max));
  const auto [w, verdict] = evolve_to_stationary(RescaledField{w0, 0.0}, e, opt);

  json j = {{"converged", verdict.converged},
            {"tau_reached", verdict.tau_reached},
            {"l1_rate", number(verdict.l1_rate)},
            {"final_residual", verdict.final_residual},
            {"residual_tolerance", verdict.residual_tolerance},
            {"last_change", verdict.last_change},
            {"tol", opt.tol},
            {"windows", verdict.windows},
            {"start", start},
            {"mass", mass(w.field)},
            {"exponents", exponents_json(e)},
            {"grid", grid_json(grid)}};
  const SupportBox box = support_box_relative(w.field);
  j["support_half_width"] = box.empty ? json(nullptr) : vector_json(box.half_width);
  if (e.isotropic()) {
    const GridField target = sample(grid, stationary_profile(e, mass(w.field)), 0.0);
    j["l1_distance_to_profile"] = l1_norm(GridField(grid, w.field.values - target.values, 0.0)) / l1_norm(target);
  }
  write_csv(out.add("profile.csv", "stationary profile in self-similar variables"), w.field);
  write_json(out.add("verdict.json", "stationarity verdict"), j);
  out.summary = {{"converged", verdict.converged}, {"final_residual", verdict.final_residual}};
}

void add_svg(Outputs& out, const std::string& name, const PowerLawFit& fit, double slope, const std::string& title) {
  write_text(out.add(name, "log-log plot: " + title), svg_loglog(fit, slope, title));
}

void verify_decay(const json& config, const ExponentSet& e, const Grid& grid, Outputs& out, VerificationReport& report,
                  json& details) {
  const Trajectory t = simulate(config, e, grid, out);
  const PowerLawFit fit = fit_decay(t, e);
  report.add(decay_check(fit, e));
  details["decay_fit"] = to_json(fit);
  add_svg(out, "decay.svg", fit, -e.N / e.lambda(), "max u vs t");
}

void verify_support(const json& config, const ExponentSet& e, const Grid& grid, Outputs& out, VerificationReport& report,
                    json& details) {
  const json& v = section(config, "verify");
  const Trajectory t = simulate(config, e, grid, out);
  std::optional<double> offset;
  if (v.contains("support_offset")) offset = v.at("support_offset").get<double>();
  std::vector<double> fitted;
  json fits = json::array();
  for (int j = 0; j < e.N; ++j) {
    const PowerLawFit fit = fit_support_growth(t, e, j, offset);
    report.add(support_check(fit, e, j));
    fitted.push_back(fit.fitted_exponent);
    json fj = to_json(fit);
    fj["axis"] = j + 1;
    // Zero-offset fit as a diagnostic next to the pinned one.
    try {
      fj["fitted_exponent_without_offset"] = fit_support_growth(t, e, j, 0.0).fitted_exponent;
    } catch (const ValidationError&) {
      fj["fitted_exponent_without_offset"] = nullptr;
    }
    fits.push_back(fj);
    add_svg(out, "support_axis" + std::to_string(j + 1) + ".svg", fit, support_time_exponent(e, j),
            "support half-width along axis " + std::to_string(j + 1));
  }
  details["support_fits"] = fits;
  for (int j = 0; j + 1 < e.N; ++j) {
    if (!(e.p[j] < e.p[j + 1])) continue;
    Check c;
    c.name = "support exponent ordering, axis " + std::to_string(j + 1) + " vs " + std::to_string(j + 2);
    c.target = support_time_exponent(e, j) - support_time_exponent(e, j + 1);
    c.measured = fitted[static_cast<std::size_t>(j)] - fitted[static_cast<std::size_t>(j + 1)];
    c.verdict = c.measured > 0.0 ? Verdict::pass : Verdict::fail;
    c.reason = "smaller p_j must grow strictly faster";
    report.add(c);
  }
}

Trajectory harnack_trajectory(const json& config, const ExponentSet& e, const Grid& grid, Outputs& out) {
  const json& h = section(config, "harnack");
  const std::string source = h.value("source", "exact");
  if (source == "exact") {
    if (!h.contains("times")) throw ValidationError("exact Harnack trajectory needs 'times'");
    return sample_trajectory(grid, barenblatt_evaluator(e), read_times(h.at("times")));
  }
  if (source == "simulate") return simulate(config, e, grid, out);
  throw ValidationError("unknown Harnack source '" + source + "'");
}

void verify_harnack(const json& config, const ExponentSet& e, const Grid& grid, Outputs& out,
                    VerificationReport& report, json& details) {
  const json& h = section(config, "harnack");
  const Trajectory t = harnack_trajectory(config, e, grid, out);
  std::vector<HarnackPoint> points;
  for (const json& p : h.at("points")) points.push_back({per_axis(p.at("x"), e.N, "x"), p.at("t").get<double>()});
  const double rho = h.at("rho").get<double>();
  const auto Cs = h.at("C").get<std::vector<double>>();

  const auto checks = check_harnack(t, e, points, rho, Cs);
  const HarnackConstants k = harnack_constants(checks);
  json list = json::array();
  for (const HarnackCheck& c : checks) list.push_back(to_json(c));
  details["harnack_checks"] = list;
  details["harnack_constants"] = {{"found", k.found}, {"gamma", k.gamma}, {"C", k.C}, {"points_used", k.points_used}};

  Check c;
  c.name = "single (gamma, C) pair over all points";
  c.target = static_cast<double>(points.size());
  c.measured = k.points_used;
  c.verdict = k.found && k.points_used == static_cast<int>(points.size()) ? Verdict::pass : Verdict::fail;
  if (k.found && k.points_used == 0) c.verdict = Verdict::skipped;
  c.reason = k.found ? "gamma = " + format_number(k.gamma) + ", C = " + format_number(k.C) : "no finite pair";
  report.add(c);

  if (h.contains("dilation") && k.found) {
    const double L = h.at("dilation").at("L").get<double>();
    const double T = h.at("dilation").at("T").get<double>();
    const Trajectory d = dilate_trajectory(t, L, T, e.p_iso());
    std::vector<HarnackPoint> moved;
    for (const HarnackPoint& p : points) moved.push_back({L * p.x0, T * p.t0});
    const HarnackConstants kd = harnack_constants(check_harnack(d, e, moved, L * rho, Cs));
    Check s = relative_check("gamma invariant under the scaling group", k.gamma, kd.found ? kd.gamma : NAN,
                             h.value("gamma_tolerance", 0.01));
    if (!kd.found) s.verdict = Verdict::fail;
    report.add(s);
    details["dilated_constants"] = {{"found", kd.found}, {"gamma", kd.gamma}, {"C", kd.C}, {"L", L}, {"T", T}};
  }
}

void verify_estimates(const json& config, const ExponentSet& e, const Grid& grid, Outputs& out,
                      VerificationReport& report, json&) {
  const json& v = section(config, "verify");
  const Trajectory t = simulate(config, e, grid, out);
  const VerificationReport r = check_apriori_estimates(t, e, v.value("r", 1.0), v.value("slack", 0.10));
  for (const Check& c : r.checks) report.add(c);
}

void verify_exact_error(const json& config, const ExponentSet& e, const Grid& grid, Outputs& out,
                        VerificationReport& report, json& details) {
  const json& v = section(config, "verify");
  const SimConfig c = read_sim_config(config, e, grid);
  if (!std::holds_alternative<BarenblattSnapshot>(c.initial)) {
    throw ValidationError("exact-error needs a Barenblatt snapshot as initial datum");
  }
  const Evaluator B = barenblatt_evaluator(e);
  auto final_error = [&](const Grid& g) {
    SimConfig cc = c;
    cc.grid = g;
    const Trajectory t = run(cc);
    double drift = 0.0;
    for (const StepStats& s : t.log) drift = std::max(drift, std::abs(s.mass_after - s.mass_before) / s.mass_before);
    return std::make_pair(relative_error_vs_exact(t.snapshots.back().field, B, NormType::L1), drift);
  };
  out.log("running the fine grid");
  const auto [fine, drift] = final_error(grid);
  report.add(Check{"relative L1 error against the exact solution", 0.0, fine, v.value("error_tolerance", 0.05),
                   fine < v.value("error_tolerance", 0.05) ? Verdict::pass : Verdict::fail,
                   "absolute bound on the relative error at t_end"});
  report.add(Check{"relative mass drift", 0.0, drift, 1e-10, drift < 1e-10 ? Verdict::pass : Verdict::fail,
                   "absolute bound, per output interval"});
  details["fine_error"] = fine;
  if (v.contains("coarse_nodes")) {
    const Eigen::VectorXd n = per_axis(v.at("coarse_nodes"), e.N, "coarse_nodes");
    const Grid coarse(grid.half_width(), n.cast<int>());
    if (!(coarse.spacing(0) > grid.spacing(0))) throw ValidationError("coarse_nodes must be fewer than the grid nodes");
    out.log("running the coarse grid");
    const double err = final_error(coarse).first;
    const double order = std::log(err / fine) / std::log(coarse.spacing(0) / grid.spacing(0));
    report.add(Check{"empirical order under refinement", 0.8, order, 0.0, order >= 0.8 ? Verdict::pass : Verdict::fail,
                     "lower bound"});
    details["coarse_error"] = err;
  }
}

void cmd_verify(const json& config, Outputs& out) {
  const ExponentSet e = read_exponents(config);
  const Grid grid = read_grid(config, e.N);
  const json& v = section(config, "verify");
  const std::string target = v.value("target", "decay");
  VerificationReport report;
  json details = json::object();
  if (target == "decay") {
    verify_decay(config, e, grid, out, report, details);
  } else if (target == "support") {
    verify_support(config, e, grid, out, report, details);
  } else if (target == "harnack") {
    verify_harnack(config, e, grid, out, report, details);
  } else if (target == "estimates") {
    verify_estimates(config, e, grid, out, report, details);
  } else if (target == "exact-error") {
    verify_exact_error(config, e, grid, out, report, details);
  } else {
    throw ValidationError("unknown verify target '" + target + "'");
  }
  json j = to_json(report);
  j["target"] = target;
  j["details"] = details;
  write_json(out.add("report.json", "verification report"), j);
  out.summary = {{"target", target}, {"all_passed", report.all_passed()}};
  for (const Check& c : report.checks) out.log(to_string(c.verdict) + ": " + c.name);
}

void cmd_rescale(const json& config, Outputs& out) {
  const ExponentSet e = read_exponents(config);
  const Grid grid = read_grid(config, e.N);
  const json& s = section(config, "rescale");
  if (!s.contains("input")) throw ValidationError("rescale needs an 'input' CSV");
  const double t = s.at("t").get<double>();
  const std::string direction = s.value("direction", "to");
  const GridField in(grid, read_csv(s.at("input").get<std::string>(), grid), t);
  GridField result;
  if (direction == "to") {
    result = to_selfsimilar(in, e).field;
  } else if (direction == "from") {
    result = from_selfsimilar(RescaledField{GridField(grid, in.values, std::log(t)), std::log(t)}, t, e);
  } else {
    throw ValidationError("rescale direction must be 'to' or 'from'");
  }
  write_csv(out.add("rescaled.csv", direction == "to" ? "field in self-similar variables" : "field in original variables"),
            result);
  write_json(out.add("rescaled.json", "grid of the rescaled field"),
             {{"direction", direction}, {"t", t}, {"tau", std::log(t)}, {"grid", grid_json(result.grid)},
              {"mass_in", mass(in)}, {"mass_out", mass(result)}});
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

} // namespace

int run_command(const json& config, const fs::path& out_dir, bool quiet) {
  Outputs out;
  out.dir = out_dir;
  out.quiet = quiet;
  const std::string started = utc_now();
  int code = 0;
  std::string error;
  std::string command;
  try {
    fs::create_directories(out_dir);
    if (!config.is_object()) throw ValidationError("config must be a JSON object");
    command = config.value("command", "");
    if (command == "exponents") {
      cmd_exponents(config, out);
    } else if (command == "exact") {
      cmd_exact(config, out);
    } else if (command == "simulate") {
      cmd_simulate(config, out);
    } else if (command == "steady") {
      cmd_steady(config, out);
    } else if (command == "verify") {
      cmd_verify(config, out);
    } else if (command == "rescale") {
      cmd_rescale(config, out);
    } else {
      throw ValidationError("unknown command '" + command + "'");
    }
  } catch (const ValidationError& ex) {
    code = 1;
    error = ex.what();
  } catch (const json::exception& ex) {
    code = 1;
    error = std::string("config: ") + ex.what();
  } catch (const fs::filesystem_error& ex) {
    code = 1;
    error = ex.what();
  } catch (const NumericalAbort& ex) {
    code = 2;
    error = ex.what();
  } catch (const std::exception& ex) {
    code = 2;
    error = ex.what();
  }
  if (!error.empty()) std::cerr << "error: " << error << '\n';

  json manifest = {{"tool", "anisoflow"},
                   {"version", version},
                   {"command", command},
                   {"config", config},
                   {"started", started},
                   {"finished", utc_now()},
                   {"files", out.files},
                   {"summary", out.summary},
                   {"exit_code", code}};
  if (!error.empty()) manifest["error"] = error;
  try {
    write_json(out_dir / "manifest.json", manifest);
  } catch (const std::exception& ex) {
    std::cerr << "error: cannot write manifest: " << ex.what() << '\n';
    if (code == 0) code = 1;
  }
  return code;
}

} // namespace anisoflow::cli
