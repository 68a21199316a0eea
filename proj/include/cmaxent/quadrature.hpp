#pragma once

#include <cstddef>
#include <vector>

#include "cmaxent/types.hpp"

namespace cmaxent {

/// Gauss-Hermite rule for expectations under a standard normal:
/// E[f(Z)] ~= sum_i weights[i] * f(nodes[i]). Weights sum to 1.
struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Rules are cached per order; the returned reference stays valid.
const HermiteRule& gauss_hermite(std::size_t order);

/// Gauss-Legendre rule on [-1, 1].
struct LegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const LegendreRule& gauss_legendre(std::size_t order);

/// Tensor product Gauss-Hermite rule mapped through x = mean + L z with L the
/// Cholesky factor of cov. Points and weights are laid out row-major over
/// (i, j) so evaluation order is fixed.
struct GaussianCubature {
  std::vector<Vec2> points;
  std::vector<double> weights;
};

GaussianCubature gaussian_cubature(const Vec2& mean, const Mat2& cov, std::size_t order_per_axis);

struct RidgeRuleOptions {
  std::size_t panel_order = 10;   // Gauss-Legendre nodes per panel on the ridge axis
  double coarse_width = 0.5;      // panel width away from the transition, in standard deviations
  double transition_halfwidth = 20.0;  // in units of 1/slope around the ridge centre
  double tail = 10.0;             // integration range +-tail standard deviations
  std::size_t cross_order = 4;    // Gauss-Hermite nodes across the ridge
  double refine = 1.0;            // divides every panel width; 2 gives the check rule
};

/// Cubature for E[g(X)] with X ~ N(mean, cov) when g depends on X through a
/// ridge a = offset + direction . X, times polynomials of degree <= 2*cross_order-1
/// in the orthogonal coordinate. In whitened rotated coordinates (u, v) the
/// ridge is a = c + slope*u; the u axis uses composite Gauss-Legendre panels
/// (fine near u = -c/slope, coarse elsewhere) against the normal density and
/// the v axis uses Gauss-Hermite.
GaussianCubature ridge_cubature(const Vec2& mean, const Mat2& cov, double offset, const Vec2& direction,
                                const RidgeRuleOptions& opts = {});

}  // namespace cmaxent
