#pragma once

#include <stdexcept>
#include <string>

namespace xhv {

// Bad user input: malformed files, out-of-range parameters, impossible
// geometry. Maps to CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime failure: non-convergence, degenerate measurements. Exit code 3.
class SimulationError : public std::runtime_error {
 public:
  explicit SimulationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace xhv
