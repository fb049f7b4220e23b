#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logschro/grid.hpp"
#include "logschro/solver.hpp"

// Single-file key=value configuration with one section per module. Unknown
// sections or keys are errors; every module precondition is checked at parse
// time with an actionable message.

namespace logschro {

struct ExperimentConfig {
  enum class Kind { gausson_check, ground, blimit, multibump, decompose };
  Kind kind = Kind::ground;
  std::uint64_t seed = 42;

  int dim = 1;
  int L = 8;
  std::vector<int> L_list;  // sweeps (blimit)
  int M = 32;

  CoefficientSpec coeff;
  SolveOptions solver;
  GlueSpec glue;  // centers snapped to site units

  double analysis_q = 4.0;
  double decompose_R = 12.0;
  double threshold = 0.5 * 0.36787944117144232159552377016146087;  // e^-1 / 2
  std::string field_in;  // decompose input path

  bool csv = false;
  std::string raw;  // config text echo for the manifest
};

const char* kind_name(ExperimentConfig::Kind k);
ExperimentConfig::Kind kind_from_name(const std::string& name);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

}  // namespace logschro
