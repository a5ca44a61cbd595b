#pragma once

#include <stdexcept>
#include <string>

namespace mh {

/// Process exit codes used by the command line tool.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kNumerical = 3,
  kIo = 4,
};

/// Invalid configuration; what() lists every violated constraint.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigen-solver failure, fixed-point non-convergence and similar.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The implicit midpoint iteration did not converge.
class StepError : public NumericalError {
 public:
  StepError(const std::string& msg, double residual) : NumericalError(msg), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

/// Near-degenerate stream-matrix spectrum when solving for B.
class ConditioningError : public NumericalError {
 public:
  ConditioningError(const std::string& msg, double gap) : NumericalError(msg), gap_(gap) {}
  double gap() const { return gap_; }

 private:
  double gap_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed binary file.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace mh
