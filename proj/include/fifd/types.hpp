#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace fifd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

// Shape or consistency violation inside the library (caller bug).
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid user-supplied parameter.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite value or broken numerical invariant during a run.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fifd
