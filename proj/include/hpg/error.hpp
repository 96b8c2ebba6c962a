#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hpg {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed session file. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A conditional probability was requested for a context that was never observed.
class UndefinedProbability : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the operation's domain.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed model document; the message starts with a JSON pointer to the offending node.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

/// No data survived the construction rules (e.g. every session was too short).
class EmptyModelError : public Error {
 public:
  using Error::Error;
};

/// Trail expansion would never stop because the model contains a probability-1 cycle.
class NonTermination : public Error {
 public:
  using Error::Error;
};

}  // namespace hpg
