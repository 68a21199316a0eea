#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "cmaxent/gaussian.hpp"
#include "cmaxent/moments.hpp"
#include "cmaxent/quadrature.hpp"

namespace cmaxent {

/// Causal-direction solution: X ~ marginal, and
/// p(y=+1 | x) = (1 + tanh(lambda0 + lambda . x)) / 2.
struct CausalModel {
  double lambda0 = 0.0;
  Vec2 lambda = Vec2::Zero();
  GaussianParams marginal;
};

// log p(+1|x) - log p(-1|x) = 2 (lambda0 + lambda . x)
double causal_logit(const CausalModel& model, const Vec2& x);
double causal_posterior(const CausalModel& model, const Vec2& x);

/// E[tanh(a)] and E[X tanh(a)] with a = lambda0 + lambda . X, X ~ marginal.
struct ForwardMoments {
  double e_y = 0.0;
  Vec2 e_xy = Vec2::Zero();
};

struct QuadratureOptions {
  RidgeRuleOptions rule;
  // The error estimate compares `rule` against a copy with panels halved and
  // more nodes per panel.
  double tolerance = 1e-8;
};

/// Throws QuadratureError when the working rule and the refined check rule
/// disagree by more than tolerance * max(1, |moments|).
ForwardMoments causal_moment_forward(double lambda0, const Vec2& lambda, const GaussianParams& marginal,
                                     const QuadratureOptions& quad = {});

struct CausalFitOptions {
  QuadratureOptions quadrature;
  double tolerance = 1e-8;  // residual infinity norm
  int max_iterations = 200;
  int max_halvings = 60;
  bool parallel = true;
};

/// Per-iterate record, filled when a diagnostics pointer is passed.
struct CausalFitTrace {
  std::vector<double> residual_norms;    // 2-norm after each accepted step, [0] = initial
  std::vector<double> min_hessian_eigs;  // smallest eigenvalue of the dual Hessian at each iterate
  int iterations = 0;
  double final_residual = 0.0;  // infinity norm
};

/// Full constraint set. Marginal = N(xbar, sigma_x - xbar xbar^T); (lambda0,
/// lambda) solve E[tanh] = 2q-1, E[X tanh] = phi by damped Newton on the dual.
CausalModel fit_causal(const MomentSpec& spec, const CausalFitOptions& opts = {}, CausalFitTrace* trace = nullptr);

/// phi2 unknown: lambda2 is held at exactly 0 and (lambda0, lambda1) match
/// (2q-1, phi1). The marginal keeps the full covariance.
CausalModel fit_causal_missing_phi2(const MomentSpec& spec, const CausalFitOptions& opts = {},
                                    CausalFitTrace* trace = nullptr);

/// s12 unknown: the maximum-entropy marginal is diagonal, and lambda is fitted
/// against it.
CausalModel fit_causal_missing_s12(const MomentSpec& spec, const CausalFitOptions& opts = {},
                                   CausalFitTrace* trace = nullptr);

/// Lower-level entry: fit (lambda0, lambda) against an arbitrary marginal and
/// target moments. `active[i]` false pins lambda_i to zero and drops the
/// matching target component.
CausalModel fit_tanh_predictor(const GaussianParams& marginal, double target_e_y, const Vec2& target_e_xy,
                               const std::array<bool, 2>& active, const CausalFitOptions& opts = {},
                               CausalFitTrace* trace = nullptr);

}  // namespace cmaxent
