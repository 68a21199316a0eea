#include "cmaxent/gaussian.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "cmaxent/quadrature.hpp"

namespace cmaxent {

void require_valid(const GaussianParams& g) {
  if (!g.mean.allFinite() || !g.cov.allFinite()) throw DataError("Gaussian parameters must be finite");
  if (std::abs(g.cov(0, 1) - g.cov(1, 0)) > 1e-12 * std::max(1.0, g.cov.cwiseAbs().maxCoeff())) {
    throw DataError("Gaussian covariance must be symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Mat2> eig(g.cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() <= 1e-12) throw DataError("Gaussian covariance must be positive definite");
}

GaussianDensity::GaussianDensity(const GaussianParams& params) : params_(params) {
  require_valid(params_);
  precision_ = params_.cov.inverse();
  precision_(1, 0) = precision_(0, 1);
  log_norm_ = -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(params_.cov.determinant());
}

double GaussianDensity::log_pdf(const Vec2& x) const {
  const Vec2 d = x - params_.mean;
  return log_norm_ - 0.5 * d.dot(precision_ * d);
}

double box_mass(const GaussianDensity& density, const Vec2& lo, const Vec2& hi, std::size_t order) {
  const auto& rule = gauss_legendre(order);
  const Vec2 half = 0.5 * (hi - lo);
  const Vec2 mid = 0.5 * (hi + lo);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const Vec2 x(mid(0) + half(0) * rule.nodes[i], mid(1) + half(1) * rule.nodes[j]);
      sum += rule.weights[i] * rule.weights[j] * std::exp(density.log_pdf(x));
    }
  }
  return sum * half(0) * half(1);
}

}  // namespace cmaxent
