#pragma once

// Brute-force maximum entropy on a finite grid. Used as independent ground
// truth for the closed forms in the causal and anticausal solvers: nothing
// here calls into those solvers except the comparison helpers at the bottom.

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cmaxent/anticausal.hpp"
#include "cmaxent/causal.hpp"
#include "cmaxent/gaussian.hpp"
#include "cmaxent/kernels.hpp"
#include "cmaxent/moments.hpp"

namespace cmaxent {

struct GridAxis {
  double lo = -4.0;
  double hi = 4.0;
  std::size_t cells = 41;

  double width() const { return (hi - lo) / static_cast<double>(cells); }
  double center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * width(); }
};

/// Tensor grid; cell k = i * x2.cells + j covers column i of x1 and row j of x2.
struct GridSpec {
  GridAxis x1;
  GridAxis x2;

  std::size_t cells() const { return x1.cells * x2.cells; }
  Vec2 center(std::size_t k) const { return {x1.center(k / x2.cells), x2.center(k % x2.cells)}; }
  Vec2 cell_lo(std::size_t k) const;
  Vec2 cell_hi(std::size_t k) const;
};

void require_valid(const GridSpec& grid);

/// Grid spanning mean +- half_width_sd marginal standard deviations per axis.
GridSpec make_grid(const Vec2& mean, const Mat2& cov, std::size_t cells_per_axis, double half_width_sd = 4.0);

/// Exact Gaussian probability of each cell, renormalised over the grid.
std::vector<double> gaussian_cell_weights(const GridSpec& grid, const GaussianParams& density);

/// Joint table p(y, cell) over y in {+1,-1}. Entries sum to 1.
struct GridDistribution {
  GridSpec grid;
  std::vector<double> joint_plus;
  std::vector<double> joint_minus;

  double p_plus() const;
  double cell_mass(std::size_t k) const { return joint_plus[k] + joint_minus[k]; }
  double conditional_plus(std::size_t k) const;            // p(y=+1 | cell)
  double class_conditional(int y, std::size_t k) const;    // p(cell | y)
  Vec2 class_mean(int y) const;
  Mat2 class_covariance(int y) const;
};

/// Shannon entropy of the joint table, 0 log 0 = 0.
double grid_entropy(const GridDistribution& dist);

struct OracleOptions {
  double tolerance = 1e-10;  // constraint residual, infinity norm
  int max_iterations = 200;
  bool parallel = true;
};

struct OracleSolution {
  GridDistribution dist;
  Eigen::VectorXd theta;
  Eigen::VectorXd target;
  double residual = 0.0;
  int iterations = 0;
};

/// Exponential family behind the conditional problem: one group per cell
/// (weight px), items y = +1, -1 with features y (1, x1[, x2]).
kernels::GroupedFamily conditional_family(const GridSpec& grid, std::span<const double> px, bool use_x2 = true);

/// Family behind the class-conditional problem: groups y = +1 (weight q) and
/// y = -1 (weight 1-q) over all cells, features
/// (y x1[, y x2], x1, x2, x1^2, x2^2[, x1 x2]).
kernels::GroupedFamily class_conditional_family(const GridSpec& grid, double q, bool use_phi2 = true,
                                                bool use_s12 = true);

/// Target vector for class_conditional_family built from the known entries.
Eigen::VectorXd class_conditional_target(const MomentSpec& spec);

/// Dual objective sum_g w_g log Z_g(theta) - theta . target with derivatives.
kernels::LogPartition dual_objective(const kernels::GroupedFamily& family, const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& target, bool parallel = true);

/// p(y | cell) maximising sum_cells px H(Y | cell) subject to
/// sum px E[Y|cell] = e_y and sum px x E[Y|cell] = e_xy (x2 component only
/// when use_x2). Throws InfeasibleError when the dual Newton fails.
OracleSolution grid_conditional_maxent(const GridSpec& grid, std::span<const double> px, double e_y,
                                       const Vec2& e_xy, bool use_x2 = true, const OracleOptions& opts = {});

/// p(cell | y) maximising the conditional entropy H(X | Y) with p(y) fixed by
/// q, subject to the known first and second moments of `targets`.
OracleSolution grid_class_conditional_maxent(const GridSpec& grid, const MomentSpec& targets,
                                             const OracleOptions& opts = {});

struct Phi2Argmax {
  double phi2_star = 0.0;
  double det_star = 0.0;
  double lo = 0.0;  // feasible interval
  double hi = 0.0;
  int iterations = 0;
};

/// Golden-section maximisation of det Sigma_{X|Y}(phi2) over the PSD-feasible
/// interval, to an interval length of 1e-10. Centred specs only.
Phi2Argmax det_argmax_phi2(const MomentSpec& spec);

// ---- comparisons against the closed forms ----

struct CausalOracleReport {
  std::size_t cells_per_axis = 0;
  double sup_norm_gap = 0.0;       // max over cells |p_grid(+|cell) - causal_posterior(centre)|
  double constraint_residual = 0.0;
  int iterations = 0;
};

/// Grid over the model marginal (+-4 sd), px = Gaussian cell masses, targets =
/// (2q-1, phi) of `spec`; compares against the fitted model's posterior.
CausalOracleReport compare_causal(const CausalModel& model, const MomentSpec& spec, std::size_t cells_per_axis,
                                  const OracleOptions& opts = {});

struct AnticausalOracleReport {
  std::size_t cells_per_axis = 0;
  double sup_norm_gap = 0.0;    // posterior gap over cell centres
  double mean_gap = 0.0;        // max |grid class mean - mu_y|
  double covariance_gap = 0.0;  // max |grid class covariance - Sigma_y|
  double constraint_residual = 0.0;
  int iterations = 0;
  Mat2 grid_cov_plus = Mat2::Zero();
  Mat2 grid_cov_minus = Mat2::Zero();
  Vec2 grid_mean_plus = Vec2::Zero();
  Vec2 grid_mean_minus = Vec2::Zero();

  double max_gap() const { return std::max({sup_norm_gap, mean_gap, covariance_gap}); }
};

/// Moments of the model discretised on `grid`: class masses are exact
/// Gaussian cell probabilities, statistics are taken at cell centres.
MomentSpec grid_targets(const AnticausalModel& model, const GridSpec& grid, bool avail_phi2 = true,
                        bool avail_s12 = true);

/// Grid over the model's implied marginal (+-4 sd). The grid problem uses the
/// model's on-grid moments (restricted to the entries `spec` marks available)
/// and its class means, covariances and posterior are compared with the model.
AnticausalOracleReport compare_anticausal(const AnticausalModel& model, const MomentSpec& spec,
                                          std::size_t cells_per_axis, const OracleOptions& opts = {});

}  // namespace cmaxent
