#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace eitcool {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;
using Triplet = Eigen::Triplet<Complex>;

inline constexpr Complex kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Hilbert space would exceed the configured size cap.
class SizeError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of the operation (negative rate, bad angle, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A denominator or linear system vanished; the message names which one.
class SingularError : public Error {
 public:
  using Error::Error;
};

class DegenerateSteadyStateError : public Error {
 public:
  DegenerateSteadyStateError(const std::string& what, int kernel_dimension, bool lower_bound)
      : Error(what), kernel_dimension_(kernel_dimension), lower_bound_(lower_bound) {}

  int kernel_dimension() const noexcept { return kernel_dimension_; }
  /// True when kernel_dimension() is only a lower bound (large spaces).
  bool lower_bound() const noexcept { return lower_bound_; }

 private:
  int kernel_dimension_;
  bool lower_bound_;
};

class NonConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Step-size underflow in the adaptive integrator.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double last_good_time)
      : Error(what), last_good_time_(last_good_time) {}

  double last_good_time() const noexcept { return last_good_time_; }

 private:
  double last_good_time_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace eitcool
