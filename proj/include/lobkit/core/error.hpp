#pragma once

#include <stdexcept>
#include <string>

namespace lobkit {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition on an argument or configuration was violated.
class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& what) : Error(what) {}
};

/// The order book rejected an event (grid overflow, over-cancellation, ...).
class BookError : public Error {
public:
  explicit BookError(const std::string& what) : Error(what) {}
};

/// A quote is required but one side of the book is empty.
class UndefinedQuote : public BookError {
public:
  explicit UndefinedQuote(const std::string& what) : BookError(what) {}
};

/// An iterative solver failed to reach its tolerance.
class ConvergenceError : public Error {
public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// The data does not span the regimes an estimator needs.
class RegimeError : public Error {
public:
  explicit RegimeError(const std::string& what) : Error(what) {}
};

}  // namespace lobkit
