#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace demrep {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Vector length does not match the operator it is fed to.
class DimensionError : public std::invalid_argument {
 public:
  DimensionError(const std::string& context, Index expected, Index actual)
      : std::invalid_argument(context + ": expected length " + std::to_string(expected) +
                              ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  Index expected() const noexcept { return expected_; }
  Index actual() const noexcept { return actual_; }

 private:
  Index expected_;
  Index actual_;
};

/// Invalid parameters or configuration (negative step, unsupported mode, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Iterates diverged, a factorization failed, or a precondition on the data failed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An exhaustive search would exceed its enumeration budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& what, double count)
      : std::runtime_error(what), count_(count) {}
  double count() const noexcept { return count_; }

 private:
  double count_;
};

inline void require_length(const char* context, Index expected, Index actual) {
  if (expected != actual) throw DimensionError(context, expected, actual);
}

}  // namespace demrep
