#include "cmaxent/combined.hpp"

#include <cmath>
#include <string>

namespace cmaxent {

namespace {

template <class Fn>
auto in_block(const char* block, Fn&& fn) {
  try {
    return fn();
  } catch (const DataError& e) {
    throw DataError(std::string(block) + " block: " + e.what());
  } catch (const InfeasibleError& e) {
    throw InfeasibleError(std::string(block) + " block: " + e.what());
  }
}

}  // namespace

void require_consistent(const CombinedSpec& spec) {
  if (!(std::abs(spec.cause.q - spec.effect.q) <= kBlockQTolerance)) {
    throw DataError("cause and effect blocks state different q (" + std::to_string(spec.cause.q) + " vs " +
                    std::to_string(spec.effect.q) + ")");
  }
}

CombinedModel fit_combined(const CombinedSpec& spec, const CausalFitOptions& opts) {
  require_consistent(spec);
  CombinedModel model;
  model.causal_part = in_block("cause", [&] { return fit_causal(spec.cause, opts); });
  model.anticausal_part = in_block("effect", [&] { return fit_anticausal(spec.effect); });
  return model;
}

double combined_logit(const CombinedModel& model, const Eigen::Vector4d& x) {
  const AnticausalModel& a = model.anticausal_part;
  const Vec2 effect = x.tail<2>();
  const double evidence = GaussianDensity({a.mu_plus, a.sigma_cond_plus}).log_pdf(effect) -
                          GaussianDensity({a.mu_minus, a.sigma_cond_minus}).log_pdf(effect);
  return causal_logit(model.causal_part, x.head<2>()) + evidence;
}

double combined_posterior(const CombinedModel& model, const Eigen::Vector4d& x) {
  return sigmoid(combined_logit(model, x));
}

CombinedSpec estimate_combined_moments(const SampleSet& samples) {
  if (samples.dim() != 4) throw DataError("combined moments need 4 covariate columns");
  return {estimate_moments(samples, 0), estimate_moments(samples, 2)};
}

}  // namespace cmaxent
