#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gd {

/// Input that violates a documented precondition on data (dimensions,
/// non-finite values, empty sequences, malformed configs).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An operation was called in a state where it is not defined, e.g.
/// asking for the parent of the root.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Internal bookkeeping is inconsistent (missing oracle correspondence,
/// broken parent/child links). Never recoverable.
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The oracle could not be reached. Placement is aborted and the
/// hierarchy is left untouched.
class OracleUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gd
