#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pbftrel {

// Bad input: parameter values, configuration, malformed structure.
class ValidationError : public std::runtime_error {
 public:
  struct Violation {
    std::string field;
    std::string reason;
  };

  explicit ValidationError(std::vector<Violation> violations);
  ValidationError(std::string field, std::string reason);

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  std::vector<Violation> violations_;
};

// Singular systems, non-convergence, improper distributions.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnstableError : public NumericalError {
 public:
  UnstableError(double up_drift, double down_drift);

  double up_drift() const noexcept { return up_; }
  double down_drift() const noexcept { return down_; }

 private:
  double up_;
  double down_;
};

// Per-level QBD dimension above the configured cap.
class DimensionError : public NumericalError {
 public:
  DimensionError(std::size_t dimension, std::size_t cap);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t dimension_;
  std::size_t cap_;
};

}  // namespace pbftrel
