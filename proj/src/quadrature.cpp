#include "cmaxent/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include <Eigen/Cholesky>

namespace cmaxent {

namespace {

// Newton iteration on the orthonormal Hermite recurrence, initial guesses as in
// the classic gauher routine. Nodes/weights for weight function exp(-t^2).
HermiteRule build_hermite(std::size_t n) {
  if (n == 0) throw DataError("quadrature order must be positive");
  const double pim4 = 1.0 / std::pow(std::numbers::pi, 0.25);
  const int order = static_cast<int>(n);
  std::vector<double> t(n), w(n);
  const int m = (order + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * order + 1.0) - 1.85575 * std::pow(2.0 * order + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(order), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * t[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * t[1];
    } else {
      z = 2.0 * z - t[i - 2];
    }
    double pp = 0.0;
    bool converged = false;
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4;
      double p2 = 0.0;
      for (int j = 0; j < order; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1)) * p3;
      }
      pp = std::sqrt(2.0 * order) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) {
        converged = true;
        break;
      }
    }
    if (!converged) throw QuadratureError("Gauss-Hermite node iteration did not converge");
    t[i] = z;
    t[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }

  HermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double inv_sqrt_pi = 1.0 / std::sqrt(std::numbers::pi);
  // ascending order; the gauher loop fills from the largest node down
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = std::numbers::sqrt2 * t[n - 1 - i];
    rule.weights[i] = w[n - 1 - i] * inv_sqrt_pi;
  }
  return rule;
}

LegendreRule build_legendre(std::size_t n) {
  if (n == 0) throw DataError("quadrature order must be positive");
  LegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - static_cast<double>(j) * p3) / static_cast<double>(j + 1);
      }
      pp = static_cast<double>(n) * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) break;
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

template <class Rule, class Build>
const Rule& cached(std::size_t order, Build build) {
  static std::mutex mu;
  static std::map<std::size_t, std::unique_ptr<Rule>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[order];
  if (!slot) slot = std::make_unique<Rule>(build(order));
  return *slot;
}

}  // namespace

const HermiteRule& gauss_hermite(std::size_t order) { return cached<HermiteRule>(order, build_hermite); }

const LegendreRule& gauss_legendre(std::size_t order) { return cached<LegendreRule>(order, build_legendre); }

GaussianCubature gaussian_cubature(const Vec2& mean, const Mat2& cov, std::size_t order_per_axis) {
  const Eigen::LLT<Mat2> llt(cov);
  if (llt.info() != Eigen::Success) throw DataError("covariance is not positive definite");
  const Mat2 L = llt.matrixL();
  const auto& rule = gauss_hermite(order_per_axis);
  const std::size_t n = rule.nodes.size();

  GaussianCubature out;
  out.points.reserve(n * n);
  out.weights.reserve(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      out.points.push_back(mean + L * Vec2(rule.nodes[i], rule.nodes[j]));
      out.weights.push_back(rule.weights[i] * rule.weights[j]);
    }
  }
  return out;
}

GaussianCubature ridge_cubature(const Vec2& mean, const Mat2& cov, double offset, const Vec2& direction,
                                const RidgeRuleOptions& opts) {
  const Eigen::LLT<Mat2> llt(cov);
  if (llt.info() != Eigen::Success) throw DataError("covariance is not positive definite");
  const Mat2 L = llt.matrixL();

  // Whitened ridge direction g = L^T direction; rotation Q has g/|g| as first column.
  const Vec2 g = L.transpose() * direction;
  const double slope = g.norm();
  Vec2 e1(1.0, 0.0);
  if (slope > 0.0) e1 = g / slope;
  const Vec2 e2(-e1(1), e1(0));
  const double c = offset + direction.dot(mean);

  // Panel breakpoints on [-tail, tail].
  const double tail = opts.tail;
  const double coarse = opts.coarse_width / opts.refine;
  std::vector<double> breaks;
  auto add_uniform = [&](double a, double b, double width) {
    if (b <= a) return;
    const auto panels = static_cast<std::size_t>(std::ceil((b - a) / width - 1e-12));
    for (std::size_t k = 0; k < panels; ++k) breaks.push_back(a + (b - a) * static_cast<double>(k) / panels);
  };
  if (slope > 0.0) {
    const double centre = -c / slope;
    const double fine = std::min(opts.coarse_width, 1.0 / slope) / opts.refine;
    const double lo = std::clamp(centre - opts.transition_halfwidth / slope, -tail, tail);
    const double hi = std::clamp(centre + opts.transition_halfwidth / slope, -tail, tail);
    add_uniform(-tail, lo, coarse);
    add_uniform(lo, hi, fine);
    add_uniform(hi, tail, coarse);
  } else {
    add_uniform(-tail, tail, coarse);
  }
  breaks.push_back(tail);

  const auto& leg = gauss_legendre(opts.panel_order);
  const auto& herm = gauss_hermite(opts.cross_order);
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  GaussianCubature out;
  out.points.reserve((breaks.size() - 1) * leg.nodes.size() * herm.nodes.size());
  out.weights.reserve(out.points.capacity());
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double half = 0.5 * (breaks[p + 1] - breaks[p]);
    const double mid = 0.5 * (breaks[p + 1] + breaks[p]);
    for (std::size_t i = 0; i < leg.nodes.size(); ++i) {
      const double u = mid + half * leg.nodes[i];
      const double wu = half * leg.weights[i] * inv_sqrt_2pi * std::exp(-0.5 * u * u);
      for (std::size_t j = 0; j < herm.nodes.size(); ++j) {
        const double v = herm.nodes[j];
        out.points.push_back(mean + L * (u * e1 + v * e2));
        out.weights.push_back(wu * herm.weights[j]);
      }
    }
  }
  return out;
}

}  // namespace cmaxent
