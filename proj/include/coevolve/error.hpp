#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace coevolve {

/// Base of every library failure. Each subclass maps to one failure family
/// so callers (and the CLI exit-code mapping) can dispatch on type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A time that must coincide with a grid node does not.
class AlignmentError : public Error {
 public:
  using Error::Error;
};

/// Mismatched sizes, grids or dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (asymmetric matrix, unnormalized masses, bad CSV).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state met during time integration.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// A memory kernel produced a non-finite value for pair (row, col).
class KernelError : public DivergenceError {
 public:
  KernelError(const std::string& what, std::size_t step, std::size_t row,
              std::size_t col)
      : DivergenceError(what, step), row_(row), col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Picard iteration failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> defects)
      : Error(what), defects_(std::move(defects)) {}
  const std::vector<double>& defects() const noexcept { return defects_; }

 private:
  std::vector<double> defects_;
};

/// Renders a short state excerpt for divergence messages.
std::string describe_state(const double* values, std::size_t count,
                           std::size_t limit = 8);

}  // namespace coevolve
