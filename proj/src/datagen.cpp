#include "cmaxent/datagen.hpp"

#include <array>
#include <vector>

#include <Eigen/Cholesky>
#include <boost/math/distributions/normal.hpp>

namespace cmaxent {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Mat2 cholesky(const Mat2& cov, const char* what) {
  const Eigen::LLT<Mat2> llt(cov);
  if (llt.info() != Eigen::Success) throw DataError(std::string(what) + " is not positive definite");
  return llt.matrixL();
}

// Rows are generated independently, then appended in order.
template <std::size_t Dim, class RowFn>
SampleSet generate(std::size_t n, RowFn&& row) {
  if (n == 0) throw DataError("sample size must be at least 1");
  std::vector<int> labels(n);
  std::vector<std::array<double, Dim>> xs(n);
  const auto sn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < sn; ++i) {
    const auto r = static_cast<std::size_t>(i);
    labels[r] = row(static_cast<std::uint64_t>(r), xs[r]);
  }
  SampleSet out(Dim);
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.add(labels[i], xs[i]);
  return out;
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed) : key_(splitmix(seed)) {}

std::uint64_t CounterRng::bits(std::uint64_t counter) const { return splitmix(key_ ^ splitmix(counter)); }

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t counter) const {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, uniform(counter));
}

SampleSet sample_causal(const CausalModel& model, std::size_t n, std::uint64_t seed) {
  require_valid(model.marginal);
  const CounterRng rng(seed);
  const Mat2 L = cholesky(model.marginal.cov, "marginal covariance");
  return generate<2>(n, [&](std::uint64_t i, std::array<double, 2>& out) {
    const Vec2 z(rng.normal(4 * i), rng.normal(4 * i + 1));
    const Vec2 x = model.marginal.mean + L * z;
    out = {x(0), x(1)};
    return rng.uniform(4 * i + 2) < causal_posterior(model, x) ? 1 : -1;
  });
}

SampleSet sample_anticausal(const AnticausalModel& model, std::size_t n, std::uint64_t seed) {
  if (!(model.q > 0.0 && model.q < 1.0)) throw DataError("q must lie strictly inside (0,1)");
  const CounterRng rng(seed);
  const Mat2 Lp = cholesky(model.sigma_cond_plus, "class +1 covariance");
  const Mat2 Lm = cholesky(model.sigma_cond_minus, "class -1 covariance");
  return generate<2>(n, [&](std::uint64_t i, std::array<double, 2>& out) {
    const bool plus = rng.uniform(4 * i) < model.q;
    const Vec2 z(rng.normal(4 * i + 1), rng.normal(4 * i + 2));
    const Vec2 x = plus ? Vec2(model.mu_plus + Lp * z) : Vec2(model.mu_minus + Lm * z);
    out = {x(0), x(1)};
    return plus ? 1 : -1;
  });
}

SampleSet sample_combined(const CombinedModel& model, std::size_t n, std::uint64_t seed) {
  require_valid(model.causal_part.marginal);
  const CounterRng rng(seed);
  const AnticausalModel& a = model.anticausal_part;
  const Mat2 L = cholesky(model.causal_part.marginal.cov, "marginal covariance");
  const Mat2 Lp = cholesky(a.sigma_cond_plus, "class +1 covariance");
  const Mat2 Lm = cholesky(a.sigma_cond_minus, "class -1 covariance");
  return generate<4>(n, [&](std::uint64_t i, std::array<double, 4>& out) {
    const Vec2 cause = model.causal_part.marginal.mean + L * Vec2(rng.normal(8 * i), rng.normal(8 * i + 1));
    const bool plus = rng.uniform(8 * i + 2) < causal_posterior(model.causal_part, cause);
    const Vec2 z(rng.normal(8 * i + 3), rng.normal(8 * i + 4));
    const Vec2 effect = plus ? Vec2(a.mu_plus + Lp * z) : Vec2(a.mu_minus + Lm * z);
    out = {cause(0), cause(1), effect(0), effect(1)};
    return plus ? 1 : -1;
  });
}

}  // namespace cmaxent
