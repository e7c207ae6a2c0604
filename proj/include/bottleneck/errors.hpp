#pragma once

#include <stdexcept>
#include <string>

namespace bottleneck {

// Input violates a documented invariant. `field()` names the offending
// field (a JSON path for problem files, a parameter name otherwise).
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// KL divergence with a zero in the second argument where the first is positive.
class DivergenceUndefined : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An exponential-family form cannot reproduce the given rule.
class ExactFitError : public std::runtime_error {
 public:
  ExactFitError(const std::string& message, double residual)
      : std::runtime_error(message), residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace bottleneck
