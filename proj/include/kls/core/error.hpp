#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kls {

/// Operand shapes do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A new column is linearly dependent on the basis at working precision.
class BreakdownError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// beta - C'C <= 0 in the Pythagorean norm update: cancellation has destroyed
/// the norm estimate.
class PythagoreanBreakdown : public BreakdownError {
 public:
  using BreakdownError::BreakdownError;
};

class IterationLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownSchemeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Matrix Market input could not be parsed; line() is 1-based.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {
inline void require_dims(bool ok, const char* what) {
  if (!ok) throw DimensionError(what);
}
}  // namespace detail

}  // namespace kls
