#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "pma/cli.hpp"
#include "pma/config.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Para-model control of dynamical-system reaching motions"};
  std::string config_path;
  std::string mode;
  std::string out_prefix;
  bool plot_data = false;
  app.add_option("config", config_path, "Run configuration file")->required();
  app.add_option("--mode", mode, "Override the run mode")
      ->check(CLI::IsMember({"open-loop", "closed-loop", "disturb", "optimize"}));
  app.add_option("--out", out_prefix, "Output path prefix");
  app.add_flag("--plot-data", plot_data, "Also write per-axis and phase-plane files");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pma::cli::kExitConfig;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "configuration error: cannot read '" << config_path << "'\n";
    return pma::cli::kExitConfig;
  }
  std::ostringstream text;
  text << in.rdbuf();

  pma::RunConfig config;
  try {
    config = pma::parse_config(text.str(), mode.empty() ? std::nullopt : pma::parse_mode(mode));
  } catch (const pma::ConfigError &e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return pma::cli::kExitConfig;
  }
  if (!out_prefix.empty()) config.output_prefix = out_prefix;
  return pma::cli::run(config, plot_data);
}
