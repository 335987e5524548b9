#pragma once

#include <stdexcept>
#include <string>

namespace sbcrb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DimensionViolation {
  NonPositive,
  AntennasBelowUsers,  // K > M
  PilotsBelowUsers,    // L < K: pilot Gram and Fisher matrix are singular
  PilotsExceedBlock,   // L > N
};

class DimensionError : public Error {
 public:
  DimensionError(DimensionViolation violation, const std::string& what)
      : Error(what), violation_(violation) {}
  DimensionViolation violation() const noexcept { return violation_; }

 private:
  DimensionViolation violation_;
};

/// A Gram matrix is singular or has condition number above the threshold.
class SingularGram : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of a transform or formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A brute-force oracle was asked for a problem larger than its cap.
class SizeGuard : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, int iterations, double residual)
      : Error(what), iterations_(iterations), residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// A design target cannot be met by any admissible value.
class Infeasible : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NonFinite : public Error {
 public:
  using Error::Error;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

}  // namespace sbcrb
