#pragma once

#include <stdexcept>
#include <string>

namespace pida2c {

// Target point outside the reachable annulus of the arm.
struct UnreachableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A configuration or endpoint breaches joint limits.
struct LimitViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyLogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveSigmaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A fail-safe recovery motion crashed after already being retried.
struct DoubleFaultError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& path, const std::string& what)
      : std::runtime_error(what + ": " + path) {}
};

}  // namespace pida2c
