#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "anisoflow/cli.hpp"

using anisoflow::cli::run_command;
using doctest::Approx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "anisoflow_test_cli" / name;
  fs::remove_all(dir);
  return dir;
}

json load(const fs::path& p) {
  std::ifstream is(p);
  return json::parse(is);
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

std::vector<std::vector<double>> read_rows(const fs::path& p) {
  std::ifstream is(p);
  std::string line;
  std::getline(is, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

} // namespace

TEST_CASE("format_number round-trips with 17 significant digits") {
  CHECK(anisoflow::cli::format_number(0.1) == "0.10000000000000001");
  CHECK(anisoflow::cli::format_number(1.0) == "1");
  CHECK(anisoflow::cli::format_number(-2.5e-20) == "-2.4999999999999999e-20");
  for (double v : {1.0 / 3.0, 6.02214076e23, -7.0 / 22.0}) CHECK(std::stod(anisoflow::cli::format_number(v)) == v);
}

TEST_CASE("exponents command") {
  const fs::path out = scratch("exponents");
  REQUIRE(run_command({{"command", "exponents"}, {"N", 2}, {"p", {3, 3}}}, out) == 0);
  const json e = load(out / "exponents.json");
  CHECK(e["lambda"].get<double>() == Approx(5.0));
  CHECK(e["beta"].get<double>() == Approx(0.4));
  CHECK(load(out / "manifest.json")["exit_code"] == 0);

  REQUIRE(run_command({{"command", "exponents"}, {"N", 3}, {"p", {3, 4, 6}}}, out) == 0);
  CHECK(load(out / "exponents.json")["p_bar"].get<double>() == Approx(4.0));

  const fs::path bad = scratch("exponents_bad");
  CHECK(run_command({{"command", "exponents"}, {"N", 1}, {"p", {2}}}, bad) == 1);
  const json m = load(bad / "manifest.json");
  CHECK(m["exit_code"] == 1);
  CHECK(m["error"].get<std::string>().find("p_i must exceed 2") != std::string::npos);
}

TEST_CASE("validation errors exit with 1") {
  const fs::path out = scratch("invalid");
  CHECK(run_command({{"command", "nonsense"}}, out) == 1);
  CHECK(run_command({{"command", "exact"}, {"p", {3}}}, out) == 1);
  CHECK(run_command({{"command", "exact"}, {"p", {3}}, {"grid", {{"half_width", 1.0}, {"nodes", 8}}}}, out) == 1);
  CHECK(run_command({{"command", "exponents"}, {"p", "three"}}, out) == 1);
  CHECK(run_command(json::array(), out) == 1);
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("exact command: Barenblatt, separable and profile") {
  const fs::path out = scratch("exact");
  REQUIRE(run_command({{"command", "exact"},
                       {"p", {3}},
                       {"grid", {{"half_width", 5.0}, {"nodes", 101}}},
                       {"exact", {{"solution", "barenblatt"}, {"t", 1.0}}}},
                      out) == 0);
  const auto rows = read_rows(out / "field.csv");
  REQUIRE(rows.size() == 101);
  CHECK(rows[50][0] == 0.0);
  CHECK(rows[50][1] == 1.0);
  CHECK(slurp(out / "field.csv").rfind("x1,value\n", 0) == 0);
  const json manifest = load(out / "manifest.json");
  CHECK(manifest["files"].size() == 2);

  REQUIRE(run_command({{"command", "exact"},
                       {"p", {3}},
                       {"grid", {{"half_width", 1.0}, {"nodes", 21}}},
                       {"exact", {{"solution", "separable"}, {"T", {1.0}}, {"t", 0.5}}}},
                      out) == 0);
  for (const auto& row : read_rows(out / "field.csv")) {
    CHECK(row[1] == Approx(std::abs(row[0] * row[0] * row[0]) / 36.0 / 0.5).epsilon(1e-14));
  }

  REQUIRE(run_command({{"command", "exact"},
                       {"p", {3}},
                       {"grid", {{"half_width", 4.0}, {"nodes", 81}}},
                       {"exact", {{"solution", "profile"}}}},
                      out) == 0);
  CHECK(load(out / "field.json")["max_zero_flux_residual"].get<double>() < 1e-10);
}

TEST_CASE("simulate command: zero datum smoke run and determinism") {
  const json config = {{"command", "simulate"},
                       {"p", {3, 4}},
                       {"grid", {{"half_width", 1.0}, {"nodes", 21}}},
                       {"simulate", {{"initial", {{"type", "zero"}}}, {"t_end", 0.1}}}};
  const fs::path a = scratch("zero_a"), b = scratch("zero_b");
  REQUIRE(run_command(config, a) == 0);
  REQUIRE(run_command(config, b) == 0);
  CHECK(fs::exists(a / "u_0000.csv"));
  for (const auto& row : read_rows(a / "u_0000.csv")) CHECK(row[2] == 0.0);
  CHECK(slurp(a / "u_0000.csv") == slurp(b / "u_0000.csv"));
  CHECK(slurp(a / "trajectory.json") == slurp(b / "trajectory.json"));

  const json dirac = {{"command", "simulate"},
                      {"p", {3}},
                      {"grid", {{"half_width", 3.0}, {"nodes", 121}}},
                      {"simulate",
                       {{"initial", {{"type", "dirac"}, {"mass", 2.0}}}, {"t_end", 0.5}, {"output_times", {0.1, 0.2}}}}};
  REQUIRE(run_command(dirac, a) == 0);
  const json traj = load(a / "trajectory.json");
  REQUIRE(traj["outputs"].size() == 3);
  for (const json& o : traj["outputs"]) CHECK(o["mass"].get<double>() == Approx(2.0).epsilon(1e-12));
  CHECK(traj["step_log"].size() == 3);
}

TEST_CASE("numerical breakdown exits with 2") {
  const fs::path out = scratch("abort");
  fs::create_directories(out);
  {
    std::ofstream os(out / "bad.csv");
    os << "x1,value\n";
    for (int k = 0; k < 21; ++k) os << -1.0 + 0.1 * k << ',' << (k == 10 ? "nan" : "0") << '\n';
  }
  const json config = {{"command", "simulate"},
                       {"p", {3}},
                       {"grid", {{"half_width", 1.0}, {"nodes", 21}}},
                       {"simulate", {{"initial", {{"type", "custom"}, {"file", (out / "bad.csv").string()}}}, {"t_end", 0.1}}}};
  CHECK(run_command(config, out / "run") == 2);
  CHECK(load(out / "run" / "manifest.json")["exit_code"] == 2);
}

TEST_CASE("steady command: an already stationary start converges at once") {
  const fs::path out = scratch("steady");
  REQUIRE(run_command({{"command", "steady"},
                       {"p", {3}},
                       {"grid", {{"half_width", 3.5}, {"nodes", 401}}},
                       {"steady", {{"start", "profile"}, {"mass", 1.0}, {"tol", 5e-3}, {"residual_tol", 1e-2}}}},
                      out) == 0);
  const json v = load(out / "verdict.json");
  CHECK(v["converged"] == true);
  CHECK(v["windows"] == 1);
  CHECK(fs::exists(out / "profile.csv"));
}

TEST_CASE("rescale command round trip") {
  const fs::path out = scratch("rescale");
  const json grid = {{"half_width", 5.0}, {"nodes", 101}};
  REQUIRE(run_command({{"command", "exact"}, {"p", {3}}, {"grid", grid}, {"exact", {{"solution", "barenblatt"}, {"t", 2.0}}}},
                      out / "exact") == 0);
  REQUIRE(run_command({{"command", "rescale"},
                       {"p", {3}},
                       {"grid", grid},
                       {"rescale", {{"input", (out / "exact" / "field.csv").string()}, {"t", 2.0}}}},
                      out / "to") == 0);
  const json meta = load(out / "to" / "rescaled.json");
  CHECK(meta["mass_out"].get<double>() == Approx(meta["mass_in"].get<double>()).epsilon(1e-12));
  CHECK(meta["grid"]["half_width"][0].get<double>() == Approx(5.0 * std::pow(2.0, -0.25)));
  // the rescaled Barenblatt is the profile C
  for (const auto& row : read_rows(out / "to" / "rescaled.csv")) {
    const double eta = std::abs(row[0]);
    const double b = 1.0 - std::pow(eta, 1.5) / 6.0;
    CHECK(row[1] == Approx(b > 0 ? b * b : 0.0).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("verify command writes a report and plots") {
  const fs::path out = scratch("verify");
  const json harnack = json::parse(R"({
    "command": "verify", "p": [3],
    "grid": {"half_width": 6.0, "nodes": 201},
    "harnack": {
      "source": "exact",
      "times": {"geometric": {"from": 0.5, "to": 4.0, "count": 30}},
      "rho": 0.25, "C": [0.2, 0.5],
      "points": [{"x": [0.0], "t": 1.5}, {"x": [0.5], "t": 1.5}]
    },
    "verify": {"target": "harnack"}
  })");
  REQUIRE(run_command(harnack, out) == 0);
  const json r = load(out / "report.json");
  CHECK(r["all_passed"] == true);
  CHECK(r["details"]["harnack_checks"].size() == 4);

  const json decay = json::parse(R"({
    "command": "verify", "p": [3],
    "grid": {"half_width": 6.0, "nodes": 201},
    "simulate": {
      "initial": {"type": "dirac", "mass": 1.0, "radius": 0.3},
      "t_end": 10.0,
      "output_times": {"geometric": {"from": 0.1, "to": 10.0, "count": 12}}
    },
    "verify": {"target": "decay"}
  })");
  REQUIRE(run_command(decay, out) == 0);
  CHECK(fs::exists(out / "decay.svg"));
  CHECK(load(out / "report.json")["checks"][0]["name"].get<std::string>().find("decay") != std::string::npos);

  json bogus = decay;
  bogus["verify"]["target"] = "bogus";
  CHECK(run_command(bogus, out) == 1);
}
