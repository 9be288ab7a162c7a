#include <CLI11.hpp>

#include <iostream>

#include "gaugeflow/pipeline.hpp"
#include "gaugeflow/run_config.hpp"

int main(int argc, char** argv) {
  using namespace gaugeflow;

  CLI::App app{"Conservation-law laboratory for harmonic-map systems on the periodic torus"};
  app.footer("\nConfig keys (file sections [grid], [map], ... or --set section.key=value):\n" + config_keys_help() +
             "\n" + table_columns_help() +
             "\nThreads: GAUGEFLOW_THREADS selects the worker count (default: all cores).\n"
             "Exit status is 0 iff every asserted invariant held.");
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  app.add_option("command", command, "generate | omega | gauge | solve | verify | study")
      ->required()
      ->check(CLI::IsMember({"generate", "omega", "gauge", "solve", "verify", "study"}));
  app.add_option("--config", config_path, "config file (TOML/INI sections)");
  app.add_option("--set", overrides, "override one key, section.key=value")->allow_extra_args(false);
  app.add_option("--out", out, "output directory")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig config = load_config(config_path, overrides);
    return run_command(config, parse_stage(command), out, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "gaugeflow: " << e.what() << "\n";
    return 2;
  }
}
