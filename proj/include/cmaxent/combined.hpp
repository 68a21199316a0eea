#pragma once

#include "cmaxent/anticausal.hpp"
#include "cmaxent/causal.hpp"
#include "cmaxent/moments.hpp"

namespace cmaxent {

/// Moments for four covariates: (x1, x2) cause Y, Y causes (x3, x4).
/// Each block carries its own q; they must agree. No cross-block moments.
struct CombinedSpec {
  MomentSpec cause;
  MomentSpec effect;
};

struct CombinedModel {
  CausalModel causal_part;
  AnticausalModel anticausal_part;
};

inline constexpr double kBlockQTolerance = 1e-8;

/// Throws DataError when the blocks disagree on q.
void require_consistent(const CombinedSpec& spec);

/// Cause block via fit_causal, effect block via fit_anticausal. Errors keep
/// their type and name the offending block.
CombinedModel fit_combined(const CombinedSpec& spec, const CausalFitOptions& opts = {});

/// logit p(+1 | x1..x4) = causal_logit(x1, x2) + log p(x3,x4 | +1) - log p(x3,x4 | -1).
double combined_logit(const CombinedModel& model, const Eigen::Vector4d& x);
double combined_posterior(const CombinedModel& model, const Eigen::Vector4d& x);

/// Block moments from a 4-covariate sample.
CombinedSpec estimate_combined_moments(const SampleSet& samples);

}  // namespace cmaxent
