#pragma once

#include <stdexcept>
#include <string>

namespace reglsl {

/// Base class for every error raised by the library. `category()` is a short
/// machine-parsable token used by the CLI for its one-line failure report.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}

  const std::string& category() const noexcept { return category_; }

 private:
  std::string category_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error("dimension", what) {}
};

class CoefficientError : public Error {
 public:
  explicit CoefficientError(const std::string& what) : Error("coefficient", what) {}
};

class SingularError : public Error {
 public:
  explicit SingularError(const std::string& what) : Error("singular", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error("parse", what) {}
};

/// Loss of positive definiteness in a normalization step. `value()` is the
/// offending eigenvalue, `step()` the Lanczos step (or -1 when not applicable).
class BreakdownError : public Error {
 public:
  BreakdownError(const std::string& what, double value, int step = -1)
      : Error("breakdown", what), value_(value), step_(step) {}

  double value() const noexcept { return value_; }
  int step() const noexcept { return step_; }

 private:
  double value_;
  int step_;
};

/// Gramian truncation removed every direction.
class EmptyModelError : public Error {
 public:
  EmptyModelError(const std::string& what, double sigma_max)
      : Error("empty_model", what), sigma_max_(sigma_max) {}

  double sigma_max() const noexcept { return sigma_max_; }

 private:
  double sigma_max_;
};

}  // namespace reglsl
