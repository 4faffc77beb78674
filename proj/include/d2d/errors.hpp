#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace d2d {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Invalid combination of options (model/flag mismatch, empty SINR denominator, ...).
class UsageError : public Error {
public:
  using Error::Error;
};

/// Quadrature or series failed to reach the requested tolerance.
/// The best estimate obtained is kept so callers can report it.
class NumericalError : public Error {
public:
  NumericalError(const std::string& what, double estimate, double error_bound)
      : Error(what), estimate_(estimate), error_bound_(error_bound) {}

  double estimate() const noexcept { return estimate_; }
  double error_bound() const noexcept { return error_bound_; }

private:
  double estimate_;
  double error_bound_;
};

/// Conditioning event with (numerically) zero probability, e.g. a truncated
/// density whose normaliser underflows.
class DegenerateSupportError : public NumericalError {
public:
  DegenerateSupportError(const std::string& what, double normaliser)
      : NumericalError(what, normaliser, 0.0) {}
};

/// Malformed configuration text.
class ParseError : public Error {
public:
  /// `line` 0 means the value did not come from a file.
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// A configuration value violates an invariant.
class ValidationError : public Error {
public:
  ValidationError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

}  // namespace d2d
