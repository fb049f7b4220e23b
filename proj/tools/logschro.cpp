#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "logschro/config.hpp"
#include "logschro/errors.hpp"
#include "logschro/experiments.hpp"

// Batch driver. One subcommand per experiment; parameters come from a
// single-file key=value config so runs are reproducible from the manifest.

int main(int argc, char** argv) {
  CLI::App app{"periodic logarithmic Schrodinger ground states and multibump solutions"};
  app.require_subcommand(1);

  std::string config_path;
  logschro::RunOptions ropts;

  const char* names[] = {"gausson-check", "ground", "blimit", "multibump", "decompose"};
  const char* descs[] = {
      "solve constant-coefficient ground state and compare with the closed-form solution",
      "compute a positive ground state",
      "sweep the box size and tabulate the ground level",
      "glue translated ground-state windows and converge a k-bump critical point",
      "greedy bump decomposition of a stored field",
  };
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", ropts.out_dir, "output directory");
    sub->add_option("--threads", ropts.threads, "concurrent solves for sweeps");
    sub->add_flag("--dump-csv", ropts.dump_csv, "also write CSV field dumps");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    logschro::ExperimentConfig cfg = logschro::load_config_file(config_path);
    std::string sub = app.get_subcommands().front()->get_name();
    if (sub != logschro::kind_name(cfg.kind)) {
      std::cerr << "error: subcommand '" << sub << "' does not match experiment.name '"
                << logschro::kind_name(cfg.kind) << "' in " << config_path << "\n";
      return 3;
    }
    int code = logschro::run_experiment(cfg, ropts);
    if (code == 0)
      std::cout << "ok: results in " << ropts.out_dir << "\n";
    else
      std::cerr << "failed (exit " << code << "): see " << ropts.out_dir << "/results.json\n";
    return code;
  } catch (const logschro::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 3;
  } catch (const logschro::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
