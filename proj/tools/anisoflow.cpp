#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "anisoflow/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"anisoflow: anisotropic p-Laplace evolution toolkit"};
  app.set_version_flag("--version", std::string(anisoflow::cli::version));
  std::string config_path;
  std::string out_dir = "out";
  std::string command;
  bool quiet = false;
  app.add_option("command", command, "exponents | exact | simulate | steady | verify | rescale (overrides the config)");
  app.add_option("-c,--config", config_path, "JSON configuration file")->required();
  app.add_option("-o,--out", out_dir, "output directory");
  app.add_flag("-q,--quiet", quiet, "no progress messages");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  nlohmann::json config;
  {
    std::ifstream is(config_path);
    if (!is) {
      std::cerr << "error: cannot open " << config_path << '\n';
      return 1;
    }
    try {
      config = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "error: " << config_path << ": " << e.what() << '\n';
      return 1;
    }
  }
  if (!command.empty()) config["command"] = command;
  return anisoflow::cli::run_command(config, out_dir, quiet);
}
