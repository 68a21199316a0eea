#include "cmaxent/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace cmaxent {

namespace {

Vec2 solve_pd(const Mat2& m, const Vec2& rhs, const char* what) {
  const Eigen::LLT<Mat2> llt(m);
  if (llt.info() != Eigen::Success || !(m.determinant() > 1e-14 * m.squaredNorm())) {
    throw InfeasibleError(std::string(what) + " is singular");
  }
  return llt.solve(rhs);
}

double cross(const Vec2& a, const Vec2& b) { return a(0) * b(1) - a(1) * b(0); }

}  // namespace

DecisionBoundary canonicalize(const DecisionBoundary& boundary) {
  const double n = boundary.w.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DataError("decision boundary needs a nonzero finite normal");
  return {boundary.w / n, boundary.b / n};
}

Vec2 normal_causal(const MomentSpec& spec) {
  if (!spec.fully_available()) throw DataError("normal_causal needs the full moment set");
  require_valid(spec);
  return solve_pd(spec.covariance(), spec.cov_xy(), "covariance of X");
}

Vec2 normal_anticausal(const MomentSpec& spec) {
  if (!spec.fully_available()) throw DataError("normal_anticausal needs the full moment set");
  require_valid(spec);
  return solve_pd(conditional_covariance(spec), spec.cov_xy(), "conditional covariance of X given Y");
}

DecisionBoundary boundary_from_causal(const CausalModel& model) {
  if (model.lambda.isZero(0.0)) throw DataError("lambda = 0: the causal posterior is constant, no boundary");
  return canonicalize({model.lambda, model.lambda0});
}

DecisionBoundary boundary_from_anticausal(const AnticausalModel& model) {
  if (!model.shared_covariance()) throw DataError("linear boundary needs a shared class covariance");
  const Vec2 diff = model.mu_plus - model.mu_minus;
  if (diff.isZero(0.0)) throw DataError("class means coincide: the anticausal posterior is constant, no boundary");
  const Vec2 w = solve_pd(model.sigma_cond_plus, diff, "class covariance");
  const double b = -0.5 * w.dot(model.mu_plus + model.mu_minus) + std::log(model.q / (1.0 - model.q));
  return canonicalize({w, b});
}

bool parallel(const Vec2& w1, const Vec2& w2, double tol) {
  const double n1 = w1.norm();
  const double n2 = w2.norm();
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw DataError("parallel() needs nonzero vectors");
  return std::abs(cross(w1, w2)) <= tol * n1 * n2;
}

double angle_between(const Vec2& w1, const Vec2& w2) {
  if (w1.isZero(0.0) || w2.isZero(0.0)) throw DataError("angle_between() needs nonzero vectors");
  return std::atan2(std::abs(cross(w1, w2)), std::abs(w1.dot(w2)));
}

ShermanMorrison sherman_morrison_decompose(const MomentSpec& spec) {
  if (!spec.fully_available()) throw DataError("Sherman-Morrison decomposition needs the full moment set");
  require_valid(spec);
  const Vec2 phi = spec.cov_xy();
  const double c = 1.0 / spec.var_y();
  const Vec2 causal = solve_pd(spec.covariance(), phi, "covariance of X");
  const Vec2 cond = solve_pd(conditional_covariance(spec), phi, "conditional covariance of X given Y");

  ShermanMorrison out;
  const double quad = c * phi.dot(cond);
  out.k = -quad / (1.0 + quad);
  if (!cond.isZero(0.0)) out.k_direct = causal.dot(cond) / cond.squaredNorm() - 1.0;
  const double scale = causal.norm();
  out.relative_error = scale > 0.0 ? (causal - (1.0 + out.k) * cond).norm() / scale : 0.0;
  if (out.relative_error > 1e-10) {
    throw InfeasibleError("Sherman-Morrison identity violated (relative error " + std::to_string(out.relative_error) +
                          "); the matrices are too ill-conditioned");
  }
  return out;
}

double partial_slope_ratio(const MomentSpec& spec) {
  MomentSpec partial = spec;
  partial.avail_s12 = false;
  if (!partial.avail_phi2) throw DataError("slope ratio needs both phi entries");
  require_valid(partial);
  const double c = 1.0 / spec.var_y();
  const Vec2 cxy = spec.cov_xy();
  const double v1 = spec.sigma_x(0, 0) - spec.xbar(0) * spec.xbar(0);
  const double v2 = spec.sigma_x(1, 1) - spec.xbar(1) * spec.xbar(1);
  const double d1 = v1 - c * cxy(0) * cxy(0);
  const double d2 = v2 - c * cxy(1) * cxy(1);
  if (!(d1 > 0.0) || !(d2 > 0.0)) throw InfeasibleError("conditional variances must be positive");
  return (d2 * v1) / (d1 * v2);
}

std::optional<std::pair<Vec2, Vec2>> clip_to_box(const DecisionBoundary& boundary, const Vec2& lo, const Vec2& hi) {
  const Vec2 a = boundary.anchor();
  const Vec2 d = boundary.direction();
  double t0 = -std::numeric_limits<double>::infinity();
  double t1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 2; ++i) {
    if (std::abs(d(i)) < 1e-300) {
      if (a(i) < lo(i) || a(i) > hi(i)) return std::nullopt;
      continue;
    }
    double ta = (lo(i) - a(i)) / d(i);
    double tb = (hi(i) - a(i)) / d(i);
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  if (!(t0 < t1)) return std::nullopt;
  return std::make_pair(Vec2(a + t0 * d), Vec2(a + t1 * d));
}

}  // namespace cmaxent
