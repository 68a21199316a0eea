#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cmaxent {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

// Malformed input, broken preconditions, single-class samples. CLI exit 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Moment set admits no solution, or an iterative solve failed. CLI exit 3.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when the fixed quadrature rule cannot reach the requested accuracy.
class QuadratureError : public InfeasibleError {
 public:
  using InfeasibleError::InfeasibleError;
};

// PSD tolerance on the smallest eigenvalue and Cauchy-Schwarz slack.
inline constexpr double kFeasibilityTol = 1e-9;

// Logistic function without overflow for large |z|.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

}  // namespace cmaxent
