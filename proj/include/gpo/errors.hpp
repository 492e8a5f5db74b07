#pragma once

#include <stdexcept>
#include <string>

namespace gpo {

/// Precondition violated by caller-supplied data (length mismatch, bad box, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A generator or objective has degree above the relaxation order.
class DegreeError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Problem-file syntax error, carrying a 1-based source position.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Every live branch has been certified empty at the given relaxation order.
class GlobalInfeasibility : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gpo
