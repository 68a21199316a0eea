#include "cmaxent/grid_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

namespace cmaxent {

Vec2 GridSpec::cell_lo(std::size_t k) const {
  const std::size_t i = k / x2.cells;
  const std::size_t j = k % x2.cells;
  return {x1.lo + static_cast<double>(i) * x1.width(), x2.lo + static_cast<double>(j) * x2.width()};
}

Vec2 GridSpec::cell_hi(std::size_t k) const { return cell_lo(k) + Vec2(x1.width(), x2.width()); }

void require_valid(const GridSpec& grid) {
  for (const auto* axis : {&grid.x1, &grid.x2}) {
    if (axis->cells < 3) throw DataError("grid needs at least 3 cells per axis");
    if (!std::isfinite(axis->lo) || !std::isfinite(axis->hi) || !(axis->hi > axis->lo)) {
      throw DataError("grid range must be a finite, non-empty interval");
    }
  }
}

GridSpec make_grid(const Vec2& mean, const Mat2& cov, std::size_t cells_per_axis, double half_width_sd) {
  GridSpec grid;
  const double sd1 = std::sqrt(cov(0, 0));
  const double sd2 = std::sqrt(cov(1, 1));
  grid.x1 = {mean(0) - half_width_sd * sd1, mean(0) + half_width_sd * sd1, cells_per_axis};
  grid.x2 = {mean(1) - half_width_sd * sd2, mean(1) + half_width_sd * sd2, cells_per_axis};
  require_valid(grid);
  return grid;
}

std::vector<double> gaussian_cell_weights(const GridSpec& grid, const GaussianParams& params) {
  require_valid(grid);
  const GaussianDensity density(params);
  const std::size_t n = grid.cells();
  std::vector<double> w(n);
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < sn; ++k) {
    const auto cell = static_cast<std::size_t>(k);
    w[cell] = box_mass(density, grid.cell_lo(cell), grid.cell_hi(cell));
  }
  double total = 0.0;
  for (double v : w) total += v;
  if (!(total > 0.0)) throw DataError("grid carries no Gaussian mass");
  for (double& v : w) v /= total;
  return w;
}

double GridDistribution::p_plus() const {
  double s = 0.0;
  for (double v : joint_plus) s += v;
  return s;
}

double GridDistribution::conditional_plus(std::size_t k) const {
  const double m = cell_mass(k);
  return m > 0.0 ? joint_plus[k] / m : 0.5;
}

double GridDistribution::class_conditional(int y, std::size_t k) const {
  const auto& table = y > 0 ? joint_plus : joint_minus;
  double s = 0.0;
  for (double v : table) s += v;
  return table[k] / s;
}

Vec2 GridDistribution::class_mean(int y) const {
  const auto& table = y > 0 ? joint_plus : joint_minus;
  double s = 0.0;
  Vec2 m = Vec2::Zero();
  for (std::size_t k = 0; k < table.size(); ++k) {
    s += table[k];
    m += table[k] * grid.center(k);
  }
  return m / s;
}

Mat2 GridDistribution::class_covariance(int y) const {
  const auto& table = y > 0 ? joint_plus : joint_minus;
  const Vec2 mean = class_mean(y);
  double s = 0.0;
  Mat2 c = Mat2::Zero();
  for (std::size_t k = 0; k < table.size(); ++k) {
    const Vec2 d = grid.center(k) - mean;
    s += table[k];
    c += table[k] * (d * d.transpose());
  }
  return c / s;
}

double grid_entropy(const GridDistribution& dist) {
  double h = 0.0;
  for (const auto* table : {&dist.joint_plus, &dist.joint_minus}) {
    for (double p : *table) {
      if (p > 0.0) h -= p * std::log(p);
    }
  }
  return h;
}

kernels::GroupedFamily conditional_family(const GridSpec& grid, std::span<const double> px, bool use_x2) {
  require_valid(grid);
  if (px.size() != grid.cells()) throw DataError("cell weights do not match the grid");
  kernels::GroupedFamily fam;
  fam.dim = use_x2 ? 3 : 2;
  const std::size_t n = grid.cells();
  fam.features.reserve(2 * n * fam.dim);
  fam.offsets.reserve(n + 1);
  fam.offsets.push_back(0);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 x = grid.center(k);
    for (const double y : {1.0, -1.0}) {
      fam.features.push_back(y);
      fam.features.push_back(y * x(0));
      if (use_x2) fam.features.push_back(y * x(1));
    }
    fam.offsets.push_back(fam.offsets.back() + 2);
    fam.group_weights.push_back(px[k]);
  }
  return fam;
}

kernels::GroupedFamily class_conditional_family(const GridSpec& grid, double q, bool use_phi2, bool use_s12) {
  require_valid(grid);
  if (!(q > 0.0 && q < 1.0)) throw DataError("q must lie strictly inside (0,1)");
  kernels::GroupedFamily fam;
  fam.dim = 5 + (use_phi2 ? 1 : 0) + (use_s12 ? 1 : 0);
  const std::size_t n = grid.cells();
  fam.features.reserve(2 * n * fam.dim);
  fam.offsets = {0, n, 2 * n};
  fam.group_weights = {q, 1.0 - q};
  for (const double y : {1.0, -1.0}) {
    for (std::size_t k = 0; k < n; ++k) {
      const Vec2 x = grid.center(k);
      fam.features.push_back(y * x(0));
      if (use_phi2) fam.features.push_back(y * x(1));
      fam.features.push_back(x(0));
      fam.features.push_back(x(1));
      fam.features.push_back(x(0) * x(0));
      fam.features.push_back(x(1) * x(1));
      if (use_s12) fam.features.push_back(x(0) * x(1));
    }
  }
  return fam;
}

Eigen::VectorXd class_conditional_target(const MomentSpec& spec) {
  std::vector<double> t;
  t.push_back(spec.phi(0));
  if (spec.avail_phi2) t.push_back(spec.phi(1));
  t.push_back(spec.xbar(0));
  t.push_back(spec.xbar(1));
  t.push_back(spec.sigma_x(0, 0));
  t.push_back(spec.sigma_x(1, 1));
  if (spec.avail_s12) t.push_back(spec.sigma_x(0, 1));
  return Eigen::Map<Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
}

kernels::LogPartition dual_objective(const kernels::GroupedFamily& family, const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& target, bool parallel) {
  auto lp = parallel ? kernels::log_partition_parallel(family, theta) : kernels::log_partition_serial(family, theta);
  lp.value -= theta.dot(target);
  lp.gradient -= target;
  return lp;
}

namespace {

struct DualResult {
  Eigen::VectorXd theta;
  double residual;
  int iterations;
};

// Damped Newton with Armijo backtracking on the convex dual.
DualResult solve_dual(const kernels::GroupedFamily& family, const Eigen::VectorXd& target, Eigen::VectorXd theta,
                      const OracleOptions& opts) {
  auto ev = dual_objective(family, theta, target, opts.parallel);
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (ev.gradient.cwiseAbs().maxCoeff() <= opts.tolerance) break;
    Eigen::MatrixXd H = ev.hessian;
    H.diagonal().array() += 1e-14 * std::max(1.0, H.trace());
    const Eigen::VectorXd step = -H.ldlt().solve(ev.gradient);
    const double slope = ev.gradient.dot(step);
    if (!step.allFinite() || !(slope < 0.0)) break;
    double t = 1.0;
    bool accepted = false;
    for (int h = 0; h < 60; ++h, t *= 0.5) {
      const Eigen::VectorXd trial = theta + t * step;
      auto ev_try = dual_objective(family, trial, target, opts.parallel);
      if (std::isfinite(ev_try.value) && ev_try.value <= ev.value + 1e-4 * t * slope) {
        theta = trial;
        ev = std::move(ev_try);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Line search stalls at round-off; one full step may still cut the gradient.
      const Eigen::VectorXd trial = theta + step;
      auto ev_try = dual_objective(family, trial, target, opts.parallel);
      if (!(ev_try.gradient.allFinite() && ev_try.gradient.norm() < ev.gradient.norm())) break;
      theta = trial;
      ev = std::move(ev_try);
    }
  }
  const double residual = ev.gradient.cwiseAbs().maxCoeff();
  if (!(residual <= opts.tolerance)) {
    throw InfeasibleError("grid maximum-entropy dual did not converge (residual " + std::to_string(residual) +
                          "); targets may be infeasible on this grid");
  }
  return {std::move(theta), residual, it};
}

}  // namespace

OracleSolution grid_conditional_maxent(const GridSpec& grid, std::span<const double> px, double e_y,
                                       const Vec2& e_xy, bool use_x2, const OracleOptions& opts) {
  if (!(std::abs(e_y) < 1.0)) throw InfeasibleError("target E[Y] must lie in (-1,1)");
  const auto family = conditional_family(grid, px, use_x2);
  Eigen::VectorXd target(static_cast<Eigen::Index>(family.dim));
  target(0) = e_y;
  target(1) = e_xy(0);
  if (use_x2) target(2) = e_xy(1);
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(target.size());
  theta0(0) = std::atanh(e_y);

  auto dual = solve_dual(family, target, theta0, opts);
  const auto probs = kernels::item_probabilities(family, dual.theta);

  OracleSolution out;
  out.dist.grid = grid;
  out.dist.joint_plus.resize(grid.cells());
  out.dist.joint_minus.resize(grid.cells());
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    out.dist.joint_plus[k] = px[k] * probs[2 * k];
    out.dist.joint_minus[k] = px[k] * probs[2 * k + 1];
  }
  out.theta = std::move(dual.theta);
  out.target = std::move(target);
  out.residual = dual.residual;
  out.iterations = dual.iterations;
  return out;
}

OracleSolution grid_class_conditional_maxent(const GridSpec& grid, const MomentSpec& targets,
                                             const OracleOptions& opts) {
  const auto family = class_conditional_family(grid, targets.q, targets.avail_phi2, targets.avail_s12);
  Eigen::VectorXd target = class_conditional_target(targets);

  // Start from a broad Gaussian matched to the second moments.
  Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(target.size());
  const Eigen::Index sq = targets.avail_phi2 ? 4 : 3;
  theta0(sq) = -0.5 / std::max(1e-12, targets.sigma_x(0, 0) - targets.xbar(0) * targets.xbar(0));
  theta0(sq + 1) = -0.5 / std::max(1e-12, targets.sigma_x(1, 1) - targets.xbar(1) * targets.xbar(1));
  theta0(sq - 2) = targets.xbar(0) * -2.0 * theta0(sq);
  theta0(sq - 1) = targets.xbar(1) * -2.0 * theta0(sq + 1);

  auto dual = solve_dual(family, target, theta0, opts);
  const auto probs = kernels::item_probabilities(family, dual.theta);

  const std::size_t n = grid.cells();
  OracleSolution out;
  out.dist.grid = grid;
  out.dist.joint_plus.resize(n);
  out.dist.joint_minus.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.dist.joint_plus[k] = targets.q * probs[k];
    out.dist.joint_minus[k] = (1.0 - targets.q) * probs[n + k];
  }
  out.theta = std::move(dual.theta);
  out.target = std::move(target);
  out.residual = dual.residual;
  out.iterations = dual.iterations;
  return out;
}

Phi2Argmax det_argmax_phi2(const MomentSpec& spec) {
  const auto [lo, hi] = phi2_feasible_interval(spec);
  auto det = [&](double phi2) { return conditional_covariance_with_phi2(spec, phi2).determinant(); };

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = det(c);
  double fd = det(d);
  int it = 0;
  while (b - a > 1e-10 && it < 500) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = det(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = det(d);
    }
    ++it;
  }
  // det is flat at its peak, so the bracket stalls near sqrt(eps); finish with
  // parabolic steps through central differences.
  double x = 0.5 * (a + b);
  const double h = 1e-4 * std::max(1.0, hi - lo);
  for (int polish = 0; polish < 3; ++polish) {
    const double fp = det(x + h);
    const double f0 = det(x);
    const double fm = det(x - h);
    const double curvature = fp - 2.0 * f0 + fm;
    if (!(curvature < 0.0)) break;
    const double next = std::clamp(x - 0.5 * h * (fp - fm) / curvature, lo, hi);
    const bool settled = std::abs(next - x) <= 1e-15 * std::max(1.0, std::abs(x));
    x = next;
    if (settled) break;
  }
  Phi2Argmax out;
  out.phi2_star = x;
  out.det_star = det(out.phi2_star);
  out.lo = lo;
  out.hi = hi;
  out.iterations = it;
  return out;
}

CausalOracleReport compare_causal(const CausalModel& model, const MomentSpec& spec, std::size_t cells_per_axis,
                                  const OracleOptions& opts) {
  const GridSpec grid = make_grid(model.marginal.mean, model.marginal.cov, cells_per_axis);
  const auto px = gaussian_cell_weights(grid, model.marginal);
  const Vec2 e_xy(spec.phi(0), spec.avail_phi2 ? spec.phi(1) : 0.0);
  const auto sol = grid_conditional_maxent(grid, px, spec.mean_y(), e_xy, spec.avail_phi2, opts);

  CausalOracleReport report;
  report.cells_per_axis = cells_per_axis;
  report.constraint_residual = sol.residual;
  report.iterations = sol.iterations;
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    const double gap = std::abs(sol.dist.conditional_plus(k) - causal_posterior(model, grid.center(k)));
    report.sup_norm_gap = std::max(report.sup_norm_gap, gap);
  }
  return report;
}

MomentSpec grid_targets(const AnticausalModel& model, const GridSpec& grid, bool avail_phi2, bool avail_s12) {
  const auto plus = gaussian_cell_weights(grid, {model.mu_plus, model.sigma_cond_plus});
  const auto minus = gaussian_cell_weights(grid, {model.mu_minus, model.sigma_cond_minus});
  MomentSpec t;
  t.q = model.q;
  t.xbar = Vec2::Zero();
  t.phi = Vec2::Zero();
  t.sigma_x = Mat2::Zero();
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    const Vec2 x = grid.center(k);
    const double wp = model.q * plus[k];
    const double wm = (1.0 - model.q) * minus[k];
    t.xbar += (wp + wm) * x;
    t.phi += (wp - wm) * x;
    t.sigma_x += (wp + wm) * (x * x.transpose());
  }
  t.avail_phi2 = avail_phi2;
  t.avail_s12 = avail_s12;
  return t;
}

AnticausalOracleReport compare_anticausal(const AnticausalModel& model, const MomentSpec& spec,
                                          std::size_t cells_per_axis, const OracleOptions& opts) {
  const auto implied = implied_moments(model);
  const Mat2 marginal_cov = implied.e_xx - implied.e_x * implied.e_x.transpose();
  const GridSpec grid = make_grid(implied.e_x, marginal_cov, cells_per_axis);
  const MomentSpec targets = grid_targets(model, grid, spec.avail_phi2, spec.avail_s12);
  const auto sol = grid_class_conditional_maxent(grid, targets, opts);

  AnticausalOracleReport report;
  report.cells_per_axis = cells_per_axis;
  report.constraint_residual = sol.residual;
  report.iterations = sol.iterations;
  report.grid_mean_plus = sol.dist.class_mean(1);
  report.grid_mean_minus = sol.dist.class_mean(-1);
  report.grid_cov_plus = sol.dist.class_covariance(1);
  report.grid_cov_minus = sol.dist.class_covariance(-1);
  report.mean_gap = std::max((report.grid_mean_plus - model.mu_plus).cwiseAbs().maxCoeff(),
                             (report.grid_mean_minus - model.mu_minus).cwiseAbs().maxCoeff());
  report.covariance_gap = std::max((report.grid_cov_plus - model.sigma_cond_plus).cwiseAbs().maxCoeff(),
                                   (report.grid_cov_minus - model.sigma_cond_minus).cwiseAbs().maxCoeff());
  for (std::size_t k = 0; k < grid.cells(); ++k) {
    const double gap = std::abs(sol.dist.conditional_plus(k) - anticausal_posterior(model, grid.center(k)));
    report.sup_norm_gap = std::max(report.sup_norm_gap, gap);
  }
  return report;
}

}  // namespace cmaxent
