#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmaxent/gaussian.hpp"
#include "cmaxent/moments.hpp"

namespace cmaxent {

enum class ImputeStrategy { PaperFormula, EntropyArgmax };

const char* to_string(ImputeStrategy s);
ImputeStrategy parse_strategy(const std::string& text);  // "paper" | "entropy"

/// Bookkeeping attached to models fitted from partial moments.
struct AnticausalMeta {
  std::optional<double> imputed_phi2;
  std::optional<ImputeStrategy> strategy;
  std::vector<std::string> warnings;
};

/// Anticausal-direction solution: Y ~ Bernoulli(q) on {-1,+1} and
/// X | Y=y ~ N(mu_y, Sigma_y). The LDA case has equal class covariances.
struct AnticausalModel {
  double q = 0.5;
  Vec2 mu_plus = Vec2::Zero();
  Vec2 mu_minus = Vec2::Zero();
  Mat2 sigma_cond_plus = Mat2::Identity();
  Mat2 sigma_cond_minus = Mat2::Identity();
  AnticausalMeta meta;

  bool shared_covariance() const { return sigma_cond_plus == sigma_cond_minus; }
};

// mu_+ = (xbar + phi) / 2q,  mu_- = (xbar - phi) / 2(1-q)
std::pair<Vec2, Vec2> class_means(const MomentSpec& spec);

/// Shared class covariance from the law of total covariance:
///   Sigma_{X|Y} = Cov(X) - Cov(X,Y) Cov(X,Y)^T / (4q(1-q)),
/// with Cov(X) = sigma_x - xbar xbar^T and Cov(X,Y) = phi - (2q-1) xbar.
/// For centred specs this is sigma_x - c phi phi^T with c = 1/(4q(1-q)).
/// Throws InfeasibleError when the result is not PSD.
Mat2 conditional_covariance(const MomentSpec& spec);

AnticausalModel fit_anticausal(const MomentSpec& spec);

/// log p(+1|x) - log p(-1|x), computed from log densities.
double anticausal_logit(const AnticausalModel& model, const Vec2& x);
double anticausal_posterior(const AnticausalModel& model, const Vec2& x);

/// Class-conditional Gaussians from per-class means and raw second moments
/// E[XX^T | y]. Unequal covariances give a quadratic decision function.
AnticausalModel fit_qda(double q, const Vec2& mean_plus, const Vec2& mean_minus, const Mat2& second_plus,
                        const Mat2& second_minus);

/// Closed-form bound on the unknown phi2 for centred specs:
///   q(1-q) s12 phi1 / (q(1-q) s1^2 - phi1^2).
double phi2_upper_bound(const MomentSpec& spec);

/// Conditional covariance of a centred spec with phi2 replaced by `phi2`.
Mat2 conditional_covariance_with_phi2(const MomentSpec& spec, double phi2);

/// Open interval of phi2 values for which conditional_covariance_with_phi2 is
/// positive definite. Throws InfeasibleError when it is empty.
std::pair<double, double> phi2_feasible_interval(const MomentSpec& spec);

/// Completes phi2 with the chosen strategy (clamped into the feasible interval
/// shrunk by 1e-9, with a warning when clamping happens), then fits.
AnticausalModel fit_anticausal_missing_phi2(const MomentSpec& spec,
                                            ImputeStrategy strategy = ImputeStrategy::EntropyArgmax);

/// s12 unknown: conditional independence given Y, so the shared covariance is
/// diag(s1^2 - c phi1^2, s2^2 - c phi2^2) for centred specs.
AnticausalModel fit_anticausal_missing_s12(const MomentSpec& spec);

/// Moments implied by a model: E[Y], E[X], E[XY], E[XX^T].
struct ImpliedMoments {
  double e_y;
  Vec2 e_x;
  Vec2 e_xy;
  Mat2 e_xx;
};

ImpliedMoments implied_moments(const AnticausalModel& model);

}  // namespace cmaxent
