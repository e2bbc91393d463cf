#pragma once

#include <stdexcept>
#include <string>

namespace firm {

// Rejected input: bad syntax, unknown name, violated precondition.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Syntax error carrying the source position.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, int line, int column)
      : ValidationError(what + " at line " + std::to_string(line) + ", column " +
                        std::to_string(column)),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

// Broken internal invariant: state is corrupt, the run must abort.
class InvariantViolation : public std::logic_error {
 public:
  explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace firm
