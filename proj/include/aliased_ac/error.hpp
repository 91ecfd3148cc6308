#pragma once

#include <stdexcept>
#include <string>

namespace aliased_ac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Carries the 1-based line (0 when unknown) and the
/// offending field path, e.g. "transition[1][2]".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, std::string field)
      : Error(format(message, line, field)), line_(line), field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& message, int line, const std::string& field) {
    std::string out = "parse error";
    if (line > 0) out += " at line " + std::to_string(line);
    if (!field.empty()) out += " in '" + field + "'";
    return out + ": " + message;
  }

  int line_;
  std::string field_;
};

/// Well-formed input that violates a model invariant (simplex rows, ranges).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A quantity conditioned on an agent state that has zero probability.
class UndefinedRowError : public Error {
 public:
  using Error::Error;
};

/// An enumeration or table would exceed its configured size cap.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

/// A history with zero likelihood was passed to a belief filter.
class ZeroLikelihoodError : public Error {
 public:
  using Error::Error;
};

/// A linear solve failed or did not reach its residual tolerance.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace aliased_ac
