#pragma once

#include <stdexcept>
#include <string>

namespace rdsim {

// A statistic is not defined on the given data (empty group, zero
// denominator). Estimators turn this into an "undefined" marker.
class UndefinedEstimand : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arguments outside the mathematical domain of a formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Generator targets that no graph can satisfy. The message names the
// binding constraint.
class InfeasibleTargets : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rdsim
