#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lcsgeo {

/// Syntax error in an expression string. `offset` is the byte offset into the
/// source at which the error was detected.
class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, std::size_t offset)
      : std::runtime_error(msg + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

/// Evaluation left the expression's domain (division by zero, log of a
/// non-positive value, ...). The message names the offending subexpression.
class DomainError : public std::runtime_error {
public:
  explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed manifold definition file. Carries the 1-based line number.
class FixtureError : public std::runtime_error {
public:
  FixtureError(const std::string& msg, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + msg),
        line_(line) {}

  int line() const { return line_; }

private:
  int line_;
};

/// A structural precondition failed (xi not unit timelike, alpha vanishing,
/// non-concircular xi, singular metric, ...).
class StructureError : public std::runtime_error {
public:
  explicit StructureError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Point sampling could not produce an admissible point set.
class SamplingError : public std::runtime_error {
public:
  explicit SamplingError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace lcsgeo
