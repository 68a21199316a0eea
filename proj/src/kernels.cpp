#include "cmaxent/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cmaxent::kernels {

namespace {

// Fixed-block reduction: block b covers [b*block, min(n,(b+1)*block)); block
// partials are combined pairwise in index order.
template <class Acc, class Fn>
Acc blocked_reduce(std::size_t n, std::size_t block, const Acc& zero, Fn&& fn) {
  const std::size_t nblocks = (n + block - 1) / block;
  if (nblocks == 0) return zero;
  std::vector<Acc> partial(nblocks, zero);
  const auto nb = static_cast<std::ptrdiff_t>(nblocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * block;
    const std::size_t end = std::min(n, begin + block);
    fn(partial[static_cast<std::size_t>(b)], begin, end);
  }
  for (std::size_t stride = 1; stride < nblocks; stride *= 2) {
    for (std::size_t i = 0; i + stride < nblocks; i += 2 * stride) partial[i] += partial[i + stride];
  }
  return partial[0];
}

void check_sizes(std::span<const Vec2> points, std::span<const double> weights) {
  if (points.size() != weights.size()) throw DataError("points and weights differ in length");
}

inline void accumulate_tanh(TanhMoments& acc, const Vec2& x, double w, double lambda0, const Vec2& lambda) {
  const double t = std::tanh(lambda0 + lambda.dot(x));
  const Eigen::Vector3d f(1.0, x(0), x(1));
  acc.first.noalias() += (w * t) * f;
  acc.second.noalias() += (w * (1.0 - t * t)) * (f * f.transpose());
}

struct PartitionAcc {
  double value = 0.0;
  Eigen::VectorXd gradient;
  Eigen::MatrixXd hessian;

  explicit PartitionAcc(std::size_t dim = 0)
      : gradient(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim))),
        hessian(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))) {}

  PartitionAcc& operator+=(const PartitionAcc& o) {
    value += o.value;
    gradient += o.gradient;
    hessian += o.hessian;
    return *this;
  }
};

struct Sums {
  double value = 0.0;
  Sums& operator+=(const Sums& o) {
    value += o.value;
    return *this;
  }
};

double score(const GroupedFamily& fam, const Eigen::VectorXd& theta, std::size_t item) {
  const double* f = fam.features.data() + item * fam.dim;
  double s = 0.0;
  for (std::size_t k = 0; k < fam.dim; ++k) s += theta(static_cast<Eigen::Index>(k)) * f[k];
  return s;
}

void check_family(const GroupedFamily& fam, const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != fam.dim) throw DataError("theta dimension mismatch");
  if (fam.offsets.size() != fam.group_weights.size() + 1) throw DataError("group offsets malformed");
  if (fam.features.size() != fam.items() * fam.dim) throw DataError("feature table malformed");
}

// One group handled serially: adds w*logZ, w*E[f], w*Cov[f] into acc.
void accumulate_group(const GroupedFamily& fam, const Eigen::VectorXd& theta, std::size_t g, PartitionAcc& acc) {
  const std::size_t begin = fam.offsets[g];
  const std::size_t end = fam.offsets[g + 1];
  const double w = fam.group_weights[g];
  if (begin == end || w == 0.0) return;
  double smax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = begin; i < end; ++i) smax = std::max(smax, score(fam, theta, i));
  double z = 0.0;
  for (std::size_t i = begin; i < end; ++i) z += std::exp(score(fam, theta, i) - smax);
  const double log_z = smax + std::log(z);

  const auto dim = static_cast<Eigen::Index>(fam.dim);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = begin; i < end; ++i) {
    const double p = std::exp(score(fam, theta, i) - log_z);
    const Eigen::Map<const Eigen::VectorXd> f(fam.features.data() + i * fam.dim, dim);
    mean.noalias() += p * f;
    second.noalias() += p * (f * f.transpose());
  }
  acc.value += w * log_z;
  acc.gradient.noalias() += w * mean;
  acc.hessian.noalias() += w * (second - mean * mean.transpose());
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

TanhMoments tanh_moments_serial(std::span<const Vec2> points, std::span<const double> weights, double lambda0,
                                const Vec2& lambda) {
  check_sizes(points, weights);
  TanhMoments acc;
  for (std::size_t i = 0; i < points.size(); ++i) accumulate_tanh(acc, points[i], weights[i], lambda0, lambda);
  return acc;
}

TanhMoments tanh_moments_parallel(std::span<const Vec2> points, std::span<const double> weights, double lambda0,
                                  const Vec2& lambda) {
  check_sizes(points, weights);
  return blocked_reduce(points.size(), kBlockSize, TanhMoments{}, [&](TanhMoments& acc, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) accumulate_tanh(acc, points[i], weights[i], lambda0, lambda);
  });
}

LogPartition log_partition_serial(const GroupedFamily& family, const Eigen::VectorXd& theta) {
  check_family(family, theta);
  PartitionAcc acc(family.dim);
  for (std::size_t g = 0; g < family.groups(); ++g) accumulate_group(family, theta, g, acc);
  return {acc.value, std::move(acc.gradient), std::move(acc.hessian)};
}

LogPartition log_partition_parallel(const GroupedFamily& family, const Eigen::VectorXd& theta) {
  check_family(family, theta);
  const std::size_t dim = family.dim;
  const std::size_t groups = family.groups();

  // Many small groups: split the group range into blocks.
  if (groups >= 64) {
    auto acc = blocked_reduce(groups, kBlockSize, PartitionAcc(dim), [&](PartitionAcc& a, std::size_t b, std::size_t e) {
      for (std::size_t g = b; g < e; ++g) accumulate_group(family, theta, g, a);
    });
    return {acc.value, std::move(acc.gradient), std::move(acc.hessian)};
  }

  // Few large groups: parallelise inside each group.
  PartitionAcc total(dim);
  const auto edim = static_cast<Eigen::Index>(dim);
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t begin = family.offsets[g];
    const std::size_t n = family.offsets[g + 1] - begin;
    const double w = family.group_weights[g];
    if (n == 0 || w == 0.0) continue;

    std::vector<double> scores(n);
    const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < sn; ++i) {
      scores[static_cast<std::size_t>(i)] = score(family, theta, begin + static_cast<std::size_t>(i));
    }
    const double smax = *std::max_element(scores.begin(), scores.end());
    const Sums z = blocked_reduce(n, kBlockSize, Sums{}, [&](Sums& s, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) s.value += std::exp(scores[i] - smax);
    });
    const double log_z = smax + std::log(z.value);

    PartitionAcc moments = blocked_reduce(n, kBlockSize, PartitionAcc(dim), [&](PartitionAcc& a, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const double p = std::exp(scores[i] - log_z);
        const Eigen::Map<const Eigen::VectorXd> f(family.features.data() + (begin + i) * dim, edim);
        a.gradient.noalias() += p * f;
        a.hessian.noalias() += p * (f * f.transpose());
      }
    });
    total.value += w * log_z;
    total.gradient.noalias() += w * moments.gradient;
    total.hessian.noalias() += w * (moments.hessian - moments.gradient * moments.gradient.transpose());
  }
  return {total.value, std::move(total.gradient), std::move(total.hessian)};
}

std::vector<double> item_probabilities(const GroupedFamily& family, const Eigen::VectorXd& theta) {
  check_family(family, theta);
  std::vector<double> out(family.items(), 0.0);
  const auto ng = static_cast<std::ptrdiff_t>(family.groups());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t gi = 0; gi < ng; ++gi) {
    const auto g = static_cast<std::size_t>(gi);
    const std::size_t begin = family.offsets[g];
    const std::size_t end = family.offsets[g + 1];
    if (begin == end) continue;
    double smax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = begin; i < end; ++i) {
      out[i] = score(family, theta, i);
      smax = std::max(smax, out[i]);
    }
    double z = 0.0;
    for (std::size_t i = begin; i < end; ++i) z += std::exp(out[i] - smax);
    const double log_z = smax + std::log(z);
    for (std::size_t i = begin; i < end; ++i) out[i] = std::exp(out[i] - log_z);
  }
  return out;
}

}  // namespace cmaxent::kernels
