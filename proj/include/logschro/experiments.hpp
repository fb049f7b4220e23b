#pragma once

#include <string>

#include "logschro/config.hpp"
#include "logschro/grid.hpp"

// Batch driver for the five canonical experiments. Writes a manifest
// (config echo, version, wall time, reports), a deterministic results file,
// and field artifacts under the output directory.

namespace logschro {

inline constexpr const char* kVersion = "1.0.0";

struct RunOptions {
  std::string out_dir = "out";
  int threads = 1;
  bool dump_csv = false;
};

// exit code: 0 pass, 2 assertion failure, 3 configuration error,
// 4 solver non-convergence
int run_experiment(const ExperimentConfig& cfg, const RunOptions& ropts);

// exact positive solution and its level for constant coefficients
GridField gausson_field(const PeriodicGrid& grid, double V, double Q);
double gausson_level(int dim, double V, double Q);

}  // namespace logschro
