#pragma once

#include <stdexcept>
#include <string>

namespace logschro {

// configuration / precondition violations (CLI exit code 3)
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& m) : std::invalid_argument(m) {}
};

// solver non-convergence and numerical failures (CLI exit code 4)
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& m) : std::runtime_error(m) {}
};

// experiment-level assertion failures (CLI exit code 2)
struct CheckError : std::runtime_error {
  explicit CheckError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace logschro
