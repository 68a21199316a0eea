#pragma once

#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "cmaxent/moments.hpp"

namespace testing {

// Random feasible centred spec: covariance from a random factor, phi scaled
// inside the conditional-PSD region.
inline cmaxent::MomentSpec random_spec(std::mt19937_64& rng, bool centred = true) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> qd(0.15, 0.85);
  cmaxent::MomentSpec s;
  s.q = qd(rng);
  cmaxent::Mat2 a;
  a << 1.0 + 0.5 * u(rng), 0.6 * u(rng), 0.6 * u(rng), 1.0 + 0.5 * u(rng);
  const cmaxent::Mat2 cov = a * a.transpose() + 0.05 * cmaxent::Mat2::Identity();
  s.xbar = centred ? cmaxent::Vec2::Zero() : cmaxent::Vec2(u(rng), u(rng));
  // Cov(X,Y) = Var(Y)^{1/2} L z. |z| < 1 keeps Sigma_{X|Y} positive definite;
  // |z| <= 0.6 also stays inside the causal bound 2 pdf(z_q) / Var(Y)^{1/2} for q in [0.15, 0.85].
  const Eigen::LLT<cmaxent::Mat2> llt(cov);
  cmaxent::Vec2 z(u(rng), u(rng));
  z *= 0.6 * std::abs(u(rng)) / std::max(1.0, z.norm());
  const cmaxent::Mat2 L = llt.matrixL();
  const cmaxent::Vec2 cxy = std::sqrt(s.var_y()) * (L * z);
  s.phi = cxy + s.xbar * s.mean_y();
  s.sigma_x = cov + s.xbar * s.xbar.transpose();
  s.sigma_x(1, 0) = s.sigma_x(0, 1);
  return s;
}

inline cmaxent::MomentSpec default_spec() {
  cmaxent::MomentSpec s;
  s.q = 0.5;
  s.phi = {0.3, 0.1};
  return s;
}

inline double cross(const cmaxent::Vec2& a, const cmaxent::Vec2& b) { return a(0) * b(1) - a(1) * b(0); }

inline double sin_angle(const cmaxent::Vec2& a, const cmaxent::Vec2& b) {
  return std::abs(cross(a, b)) / (a.norm() * b.norm());
}

}  // namespace testing
