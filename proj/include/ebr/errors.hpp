#pragma once

#include <stdexcept>
#include <string>

namespace ebr {

// Argument outside the mathematical domain of an operation (non-finite
// matrix entries, probabilities outside (0, 1), k < 2, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

// Input that is well-formed but cannot be tested, e.g. zero variance.
class DegenerateInputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Invalid or missing configuration (bad alpha, even padding count, empty table).
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Numerical construction failure, e.g. the Painleve integration blew up.
class ConstructionError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
      : std::runtime_error(what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  // 0 when the error concerns a whole line.
  std::size_t column() const noexcept { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace ebr
