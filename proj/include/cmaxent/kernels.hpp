#pragma once

// Data-parallel inner loops shared by the solvers. Every kernel has a plain
// serial reference (`*_serial`) and an OpenMP version (`*_parallel`). The
// parallel versions reduce fixed-size blocks and combine the block partials
// pairwise in a fixed order, so their results do not depend on the thread
// count. The serial versions are kept for testing and benchmarking.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "cmaxent/types.hpp"

namespace cmaxent::kernels {

inline constexpr std::size_t kBlockSize = 256;

/// Weighted sums over points x with features f = (1, x1, x2) and
/// a = lambda0 + lambda . x:
///   first  = sum w tanh(a) f
///   second = sum w (1 - tanh(a)^2) f f^T
struct TanhMoments {
  Eigen::Vector3d first = Eigen::Vector3d::Zero();
  Eigen::Matrix3d second = Eigen::Matrix3d::Zero();

  TanhMoments& operator+=(const TanhMoments& o) {
    first += o.first;
    second += o.second;
    return *this;
  }
};

TanhMoments tanh_moments_serial(std::span<const Vec2> points, std::span<const double> weights, double lambda0,
                                const Vec2& lambda);
TanhMoments tanh_moments_parallel(std::span<const Vec2> points, std::span<const double> weights, double lambda0,
                                  const Vec2& lambda);

/// A finite exponential family split into normalisation groups. Item i has
/// feature row features[i*dim .. i*dim+dim). Group g owns items
/// [offsets[g], offsets[g+1]) and carries weight group_weights[g]. Under
/// parameters theta, p(i | g) is proportional to exp(theta . f_i).
struct GroupedFamily {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<std::size_t> offsets;  // size groups+1
  std::vector<double> group_weights;

  std::size_t items() const { return offsets.empty() ? 0 : offsets.back(); }
  std::size_t groups() const { return group_weights.size(); }
};

/// log partition sum_g w_g log Z_g(theta) with its gradient
/// (sum_g w_g E_g[f]) and Hessian (sum_g w_g Cov_g[f]).
struct LogPartition {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;
};

LogPartition log_partition_serial(const GroupedFamily& family, const Eigen::VectorXd& theta);
LogPartition log_partition_parallel(const GroupedFamily& family, const Eigen::VectorXd& theta);

/// Item probabilities p(i | g) for every item, in item order.
std::vector<double> item_probabilities(const GroupedFamily& family, const Eigen::VectorXd& theta);

// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int max_threads();

}  // namespace cmaxent::kernels
