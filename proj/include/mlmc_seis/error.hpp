#pragma once

#include <stdexcept>
#include <string>

namespace mlmcseis {

// Process exit codes used by the CLI.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kInfeasible = 3,
  kSolver = 4,
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InfeasibleTolerance : public std::runtime_error {
 public:
  InfeasibleTolerance(const std::string& what, double smallest_bias)
      : std::runtime_error(what), smallest_bias_(smallest_bias) {}
  double smallest_bias() const { return smallest_bias_; }

 private:
  double smallest_bias_;
};

class SolverFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mlmcseis
