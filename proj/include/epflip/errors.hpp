#pragma once

#include <stdexcept>
#include <string>

namespace epflip {

/// Invalid argument outside an operation's mathematical domain
/// (negative intensity, time outside the pulse, index out of range, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent configuration / input file. Carries the
/// offending field (or file) name so diagnostics can point at it.
class ConfigError : public std::runtime_error {
public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Numerical breakdown: NaN during propagation, eigensolver failure,
/// non-convergence, undefined derived quantity.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace epflip
