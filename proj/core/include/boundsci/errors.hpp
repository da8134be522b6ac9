#pragma once

#include <stdexcept>
#include <string>

namespace boundsci {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Coverage level the critical-value machinery does not handle (alpha >= 0.5).
class UnsupportedLevel : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Numerical procedure failed to converge or to bracket its root.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::string trace)
      : std::runtime_error(what), trace_(std::move(trace)) {}

  const std::string& trace() const noexcept { return trace_; }

 private:
  std::string trace_;
};

/// Malformed input file or row.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace boundsci
