#pragma once

#include <stdexcept>
#include <string>

namespace argmap {

// Base of every error raised by the library. The CLI maps these onto exit
// code 2 (data/integrity failure); UsageError maps onto exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A record in an input stream could not be parsed. Carries the 1-based line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Input parsed, but violates a structural invariant (dangling reference,
// cycle, duplicate key, ...).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Operation called on a value in the wrong lifecycle state.
class StateError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A metric has no defined value for the given input (empty pool, no
// pairable items).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Label normalization removed every token.
class DegenerateLabelError : public Error {
 public:
  using Error::Error;
};

// Transient failure; the caller may retry (e.g. a failed judgment write).
class RetryableError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace argmap
