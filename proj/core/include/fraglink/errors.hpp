#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fraglink {

/// Coarse error class; the CLI maps it onto exit codes.
enum class ErrorCategory { Usage, Validation, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCategory::Validation,
              "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

/// A node has only fragile out-links and the formulation cannot represent
/// the all-off choice.
class FragileNodeError : public ValidationError {
 public:
  FragileNodeError(std::size_t node, const std::string& what)
      : ValidationError(what), node_(node) {}

  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// Some nodes cannot reach the target node. `component` is a closed strongly
/// connected component that never reaches it.
class UnreachableError : public Error {
 public:
  UnreachableError(std::vector<std::size_t> component, const std::string& what)
      : Error(ErrorCategory::Validation, what), component_(std::move(component)) {}

  const std::vector<std::size_t>& component() const noexcept { return component_; }

 private:
  std::vector<std::size_t> component_;
};

class ImproperPolicyError : public Error {
 public:
  ImproperPolicyError(std::vector<std::size_t> stuck_states, const std::string& what)
      : Error(ErrorCategory::Validation, what), stuck_states_(std::move(stuck_states)) {}

  /// States from which the target is not reached with probability one.
  const std::vector<std::size_t>& stuck_states() const noexcept { return stuck_states_; }

 private:
  std::vector<std::size_t> stuck_states_;
};

class ImproperStructureError : public Error {
 public:
  explicit ImproperStructureError(const std::string& what)
      : Error(ErrorCategory::Numeric, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorCategory::Numeric, what) {}
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(std::vector<double> last_iterate, std::size_t iterations,
                      const std::string& what)
      : Error(ErrorCategory::Numeric, what),
        last_iterate_(std::move(last_iterate)),
        iterations_(iterations) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  std::vector<double> last_iterate_;
  std::size_t iterations_;
};

/// Exhaustive enumeration refused because 2^d exceeds the configured cap.
class CapExceededError : public Error {
 public:
  explicit CapExceededError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

}  // namespace fraglink
