#pragma once

#include <stdexcept>
#include <string>

namespace polydelay {

/// Invalid experiment configuration (unknown key, bad value, out-of-range option).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The integrator could not complete the requested solve.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal numerical routine failed (eigensolver non-convergence, degenerate rule).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polydelay
