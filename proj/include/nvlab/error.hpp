#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nvlab {

// Base class for all library errors. The CLI maps UsageError to exit code 2
// and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input supplied by the caller: malformed config, unreadable file,
// invalid parameter combination.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Pulse-program source that does not follow the grammar.
class ParseError : public UsageError {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : UsageError("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                   message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// A syntactically valid program that cannot be turned into a timed
// instruction list for the requested parameters.
class CompileError : public Error {
 public:
  using Error::Error;
};

// Failure inside a numerical routine (singular system, invalid domain).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace nvlab
