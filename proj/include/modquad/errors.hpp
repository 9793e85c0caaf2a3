#pragma once

#include <stdexcept>
#include <string>

namespace modquad {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates an operation's precondition (wrong modulus shape,
/// length mismatch, non-symmetric matrix, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The requested computation does not fit the configured budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

/// Malformed polynomial text or JSON. `position` is a 0-based character
/// offset into the input, or npos when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position = std::string::npos)
      : Error(position == std::string::npos
                  ? what
                  : what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace modquad
