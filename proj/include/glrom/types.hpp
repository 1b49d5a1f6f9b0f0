#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace glrom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Index = Eigen::Index;

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad sizes, counts or out-of-range arguments.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Singular or otherwise unusable linear algebra.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Exponent of the nonlinearity exceeded the configured bound.
class OverflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Newton failed to converge (cap reached or diverging corrections).
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, int step)
      : Error(what + " (time step " + std::to_string(step) + ")"), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace glrom
