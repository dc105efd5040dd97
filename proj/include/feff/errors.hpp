#pragma once

#include <stdexcept>
#include <string>

namespace feff {

/// Malformed user input: expression syntax, geometry files, CLI values.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expression syntax error with a 1-based position inside the source text.
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, int line, int column)
      : InputError(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        message_(what),
        line_(line),
        column_(column) {}
  /// Message without the position suffix.
  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

/// Evaluation or geometry failure: non-finite values, degenerate metric,
/// internal consistency violations.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace feff
