#pragma once

#include <stdexcept>
#include <string>

namespace vlcshape {

/// Argument outside the mathematical domain of a function (e.g. alpha not in (0, 1/2)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller broke a precondition (wrong vector length, index out of range).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Infeasible or unsupported configuration (rate too small, scheme without union bound).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A decoded point that does not belong to the finite constellation.
class DemapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vlcshape
