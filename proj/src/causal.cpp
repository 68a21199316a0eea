#include "cmaxent/causal.hpp"

#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "cmaxent/kernels.hpp"
#include "cmaxent/quadrature.hpp"

namespace cmaxent {

double causal_logit(const CausalModel& model, const Vec2& x) {
  return 2.0 * (model.lambda0 + model.lambda.dot(x));
}

// (1 + tanh(a)) / 2 == sigmoid(2a); the sigmoid form keeps far-tail values exact.
double causal_posterior(const CausalModel& model, const Vec2& x) { return sigmoid(causal_logit(model, x)); }

namespace {

kernels::TanhMoments evaluate(const GaussianParams& marginal, const RidgeRuleOptions& opts, double lambda0,
                              const Vec2& lambda, bool parallel) {
  const auto rule = ridge_cubature(marginal.mean, marginal.cov, lambda0, lambda, opts);
  return parallel ? kernels::tanh_moments_parallel(rule.points, rule.weights, lambda0, lambda)
                  : kernels::tanh_moments_serial(rule.points, rule.weights, lambda0, lambda);
}

ForwardMoments to_forward(const kernels::TanhMoments& m) {
  return {m.first(0), Vec2(m.first(1), m.first(2))};
}

void check_quadrature(const ForwardMoments& value, double lambda0, const Vec2& lambda, const GaussianParams& marginal,
                      const QuadratureOptions& quad) {
  RidgeRuleOptions finer = quad.rule;
  finer.refine *= 2.0;
  finer.panel_order += 4;
  finer.tail += 2.0;
  const auto check = to_forward(evaluate(marginal, finer, lambda0, lambda, true));
  const double scale = std::max({1.0, std::abs(value.e_y), value.e_xy.cwiseAbs().maxCoeff()});
  const double err = std::max(std::abs(check.e_y - value.e_y), (check.e_xy - value.e_xy).cwiseAbs().maxCoeff());
  if (err > quad.tolerance * scale) {
    throw QuadratureError("quadrature rule insufficient: estimated error " + std::to_string(err) +
                          " exceeds tolerance");
  }
}

// With E[Y] fixed, the largest Mahalanobis length of Cov(X, Y) any [-1, 1]
// valued predictor can reach is 2 pdf(z_q), attained only by a hard threshold
// on a linear score. tanh predictors approach it but never reach it.
void require_causal_feasible(const GaussianParams& marginal, double e_y, const Vec2& e_xy,
                             const std::vector<int>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size()) - 1;
  if (n == 0) return;
  Eigen::VectorXd cxy(n);
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    const int i = idx[static_cast<std::size_t>(a + 1)] - 1;
    cxy(a) = e_xy(i) - marginal.mean(i) * e_y;
    for (Eigen::Index b = 0; b < n; ++b) cov(a, b) = marginal.cov(i, idx[static_cast<std::size_t>(b + 1)] - 1);
  }
  const double length = std::sqrt(cxy.dot(cov.ldlt().solve(cxy)));
  const boost::math::normal_distribution<double> standard;
  const double q = 0.5 * (1.0 + e_y);
  const double bound = 2.0 * boost::math::pdf(standard, boost::math::quantile(standard, q));
  if (!(length < bound)) {
    throw InfeasibleError("no tanh predictor reaches these moments: Mahalanobis length of Cov(X,Y) " +
                          std::to_string(length) + " must be below " + std::to_string(bound) +
                          " for a Gaussian marginal with this q");
  }
}

}  // namespace

ForwardMoments causal_moment_forward(double lambda0, const Vec2& lambda, const GaussianParams& marginal,
                                     const QuadratureOptions& quad) {
  require_valid(marginal);
  const auto value = to_forward(evaluate(marginal, quad.rule, lambda0, lambda, true));
  check_quadrature(value, lambda0, lambda, marginal, quad);
  return value;
}

CausalModel fit_tanh_predictor(const GaussianParams& marginal, double target_e_y, const Vec2& target_e_xy,
                               const std::array<bool, 2>& active, const CausalFitOptions& opts,
                               CausalFitTrace* trace) {
  require_valid(marginal);
  if (!(std::abs(target_e_y) < 1.0)) throw InfeasibleError("target E[Y] must lie in (-1,1)");

  // Parameter layout (lambda0, lambda1, lambda2); `idx` lists the free ones.
  std::vector<int> idx{0};
  for (int i = 0; i < 2; ++i) {
    if (active[static_cast<std::size_t>(i)]) idx.push_back(i + 1);
  }
  require_causal_feasible(marginal, target_e_y, target_e_xy, idx);
  const auto n = static_cast<Eigen::Index>(idx.size());
  const Eigen::Vector3d target(target_e_y, target_e_xy(0), target_e_xy(1));

  Eigen::Vector3d theta(std::atanh(target_e_y), 0.0, 0.0);

  auto eval = [&](const Eigen::Vector3d& th, Eigen::VectorXd& residual, Eigen::MatrixXd* hessian) {
    const auto m = evaluate(marginal, opts.quadrature.rule, th(0), Vec2(th(1), th(2)), opts.parallel);
    residual.resize(n);
    if (hessian) hessian->resize(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      residual(a) = m.first(idx[a]) - target(idx[a]);
      if (hessian) {
        for (Eigen::Index b = 0; b < n; ++b) (*hessian)(a, b) = m.second(idx[a], idx[b]);
      }
    }
  };

  Eigen::VectorXd r;
  Eigen::MatrixXd H;
  eval(theta, r, &H);
  if (trace) {
    *trace = CausalFitTrace{};
    trace->residual_norms.push_back(r.norm());
  }

  int it = 0;
  bool converged = r.cwiseAbs().maxCoeff() <= opts.tolerance;
  for (; it < opts.max_iterations && !converged; ++it) {
    if (trace) {
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H, Eigen::EigenvaluesOnly);
      trace->min_hessian_eigs.push_back(eig.eigenvalues().minCoeff());
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd step = -ldlt.solve(r);
    if (!step.allFinite()) break;

    const double r0 = r.norm();
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd r_try;
    Eigen::Vector3d trial;
    for (int h = 0; h <= opts.max_halvings; ++h, t *= 0.5) {
      trial = theta;
      for (Eigen::Index a = 0; a < n; ++a) trial(idx[a]) += t * step(a);
      eval(trial, r_try, nullptr);
      if (r_try.allFinite() && r_try.norm() < r0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    theta = trial;
    eval(theta, r, &H);
    if (trace) trace->residual_norms.push_back(r.norm());
    converged = r.cwiseAbs().maxCoeff() <= opts.tolerance;
  }

  // A few polishing steps once inside tolerance; kept only if they help.
  for (int polish = 0; converged && polish < 2; ++polish) {
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    const Eigen::VectorXd step = -ldlt.solve(r);
    Eigen::Vector3d trial = theta;
    for (Eigen::Index a = 0; a < n; ++a) trial(idx[a]) += step(a);
    Eigen::VectorXd r_try;
    Eigen::MatrixXd H_try;
    eval(trial, r_try, &H_try);
    if (!(r_try.allFinite() && r_try.norm() < r.norm())) break;
    theta = trial;
    r = r_try;
    H = H_try;
    if (trace) trace->residual_norms.push_back(r.norm());
  }

  const double final_residual = r.cwiseAbs().maxCoeff();
  if (trace) {
    trace->iterations = it;
    trace->final_residual = final_residual;
  }
  if (!converged) {
    throw InfeasibleError("causal dual Newton did not converge after " + std::to_string(it) +
                          " iterations (residual " + std::to_string(final_residual) +
                          "); the moments may sit on the feasibility boundary");
  }

  CausalModel model;
  model.lambda0 = theta(0);
  model.lambda = Vec2(theta(1), theta(2));
  model.marginal = marginal;
  check_quadrature(to_forward(evaluate(marginal, opts.quadrature.rule, model.lambda0, model.lambda, true)),
                   model.lambda0, model.lambda, marginal, opts.quadrature);
  return model;
}

CausalModel fit_causal(const MomentSpec& spec, const CausalFitOptions& opts, CausalFitTrace* trace) {
  if (!spec.fully_available()) throw DataError("fit_causal needs every moment; use a missing-moment variant");
  require_valid(spec);
  GaussianParams marginal{spec.xbar, spec.covariance()};
  marginal.cov(1, 0) = marginal.cov(0, 1);
  return fit_tanh_predictor(marginal, spec.mean_y(), spec.phi, {true, true}, opts, trace);
}

CausalModel fit_causal_missing_phi2(const MomentSpec& spec, const CausalFitOptions& opts, CausalFitTrace* trace) {
  if (!spec.avail_s12) throw DataError("missing-phi2 fit needs s12");
  MomentSpec partial = spec;
  partial.avail_phi2 = false;
  require_valid(partial);
  GaussianParams marginal{spec.xbar, spec.covariance()};
  marginal.cov(1, 0) = marginal.cov(0, 1);
  CausalModel model = fit_tanh_predictor(marginal, spec.mean_y(), Vec2(spec.phi(0), 0.0), {true, false}, opts, trace);
  model.lambda(1) = 0.0;
  return model;
}

CausalModel fit_causal_missing_s12(const MomentSpec& spec, const CausalFitOptions& opts, CausalFitTrace* trace) {
  if (!spec.avail_phi2) throw DataError("missing-s12 fit needs phi2");
  MomentSpec partial = spec;
  partial.avail_s12 = false;
  require_valid(partial);
  GaussianParams marginal;
  marginal.mean = spec.xbar;
  marginal.cov = Mat2::Zero();
  marginal.cov(0, 0) = spec.sigma_x(0, 0) - spec.xbar(0) * spec.xbar(0);
  marginal.cov(1, 1) = spec.sigma_x(1, 1) - spec.xbar(1) * spec.xbar(1);
  return fit_tanh_predictor(marginal, spec.mean_y(), spec.phi, {true, true}, opts, trace);
}

}  // namespace cmaxent
