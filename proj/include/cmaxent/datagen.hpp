#pragma once

#include <cstddef>
#include <cstdint>

#include "cmaxent/anticausal.hpp"
#include "cmaxent/causal.hpp"
#include "cmaxent/combined.hpp"
#include "cmaxent/moments.hpp"

namespace cmaxent {

/// Counter-based generator: draw i is a pure function of (seed, i), so
/// samples are reproducible bit for bit and rows can be drawn in any order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed);

  std::uint64_t bits(std::uint64_t counter) const;
  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const;
  /// Standard normal through the inverse CDF.
  double normal(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

/// x ~ model.marginal, y ~ causal_posterior(x).
SampleSet sample_causal(const CausalModel& model, std::size_t n, std::uint64_t seed);

/// y ~ Bernoulli(q) on {-1, +1}, x ~ N(mu_y, Sigma_y).
SampleSet sample_anticausal(const AnticausalModel& model, std::size_t n, std::uint64_t seed);

/// (x1, x2) ~ causal marginal, y ~ causal posterior, (x3, x4) ~ N(mu_y, Sigma_y).
SampleSet sample_combined(const CombinedModel& model, std::size_t n, std::uint64_t seed);

}  // namespace cmaxent
