#include "sacfem/error.hpp"
#include "sacfem/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace sacfem;

int main(int argc, char **argv) {
  CLI::App app{"Finite element experiments for the stochastic Allen-Cahn equation"};
  std::string config, output, replay_manifest, command;
  int workers = 0;
  app.add_option("command", command,
                 "mesh-info | operators | converge-smooth | converge-rough | validate-noise | ou-validate | moments");
  app.add_option("--config", config, "key = value configuration file");
  app.add_option("--output", output, "output directory (overrides output_dir)");
  app.add_option("--workers", workers, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);
  app.add_option("--replay", replay_manifest, "re-run a manifest and compare outputs byte for byte");
  CLI11_PARSE(app, argc, argv);

  try {
    if (!replay_manifest.empty()) {
      if (output.empty())
        throw ConfigError("output", "--replay needs --output for the new run");
      const auto r = replay(replay_manifest, output, workers > 0 ? workers : 1);
      for (const auto &m : r.mismatches)
        std::cout << "MISMATCH " << m << '\n';
      std::cout << (r.mismatches.empty() ? "replay identical" : "replay differs") << '\n';
      return r.exit_code;
    }
    ExperimentConfig cfg;
    if (!config.empty()) {
      cfg = load_config(config);
      if (!command.empty() && parse_command(command) != cfg.command)
        throw ConfigError("command", "positional command disagrees with the config file");
    } else if (!command.empty()) {
      cfg = default_config(parse_command(command));
    } else {
      throw ConfigError("command", "give a command or --config");
    }
    if (!output.empty())
      cfg.output_dir = output;
    if (workers > 0)
      cfg.settings.workers = workers;
    const auto r = run_experiment(cfg);
    for (const auto &line : r.checks)
      std::cout << line << '\n';
    std::cout << "outputs in " << cfg.output_dir.string() << '\n';
    return r.exit_code;
  } catch (const ConfigError &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return exit_config;
  } catch (const Error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_numerical;
  }
}
