#include "cmaxent/anticausal.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "cmaxent/grid_oracle.hpp"

namespace cmaxent {

namespace {

constexpr double kClampShrink = 1e-9;

void require_q(double q) {
  if (!(q > 0.0 && q < 1.0)) throw DataError("q must lie strictly inside (0,1)");
}

void require_centered(const MomentSpec& spec, const char* what) {
  if (!spec.is_centered()) throw DataError(std::string(what) + " requires a centred spec (xbar = 0)");
}

double min_eig(const Mat2& m) {
  return Eigen::SelfAdjointEigenSolver<Mat2>(m, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
}

void require_positive_definite(const Mat2& m, const char* what) {
  if (!(min_eig(m) > 1e-12)) throw InfeasibleError(std::string(what) + " is singular; no Gaussian density exists");
}

Mat2 symmetrize(Mat2 m) {
  m(1, 0) = m(0, 1);
  return m;
}

}  // namespace

const char* to_string(ImputeStrategy s) {
  return s == ImputeStrategy::PaperFormula ? "paper" : "entropy";
}

ImputeStrategy parse_strategy(const std::string& text) {
  if (text == "paper") return ImputeStrategy::PaperFormula;
  if (text == "entropy") return ImputeStrategy::EntropyArgmax;
  throw DataError("unknown imputation strategy '" + text + "'");
}

std::pair<Vec2, Vec2> class_means(const MomentSpec& spec) {
  require_q(spec.q);
  if (!spec.avail_phi2) throw DataError("class means need both phi entries");
  return {(spec.xbar + spec.phi) / (2.0 * spec.q), (spec.xbar - spec.phi) / (2.0 * (1.0 - spec.q))};
}

Mat2 conditional_covariance(const MomentSpec& spec) {
  require_q(spec.q);
  if (!spec.fully_available()) throw DataError("conditional covariance needs the full moment set");
  const Vec2 cxy = spec.cov_xy();
  const Mat2 cond = symmetrize(spec.covariance() - (cxy * cxy.transpose()) / spec.var_y());
  if (min_eig(cond) < -kFeasibilityTol) {
    throw InfeasibleError("conditional covariance is not positive semidefinite; the moments are infeasible");
  }
  return cond;
}

AnticausalModel fit_anticausal(const MomentSpec& spec) {
  if (!spec.fully_available()) throw DataError("fit_anticausal needs every moment; use a missing-moment variant");
  require_valid(spec);
  AnticausalModel model;
  model.q = spec.q;
  std::tie(model.mu_plus, model.mu_minus) = class_means(spec);
  model.sigma_cond_plus = conditional_covariance(spec);
  require_positive_definite(model.sigma_cond_plus, "conditional covariance");
  model.sigma_cond_minus = model.sigma_cond_plus;
  return model;
}

double anticausal_logit(const AnticausalModel& model, const Vec2& x) {
  const GaussianDensity plus({model.mu_plus, model.sigma_cond_plus});
  const GaussianDensity minus({model.mu_minus, model.sigma_cond_minus});
  const double prior = std::log(model.q / (1.0 - model.q));
  return prior + (plus.log_pdf(x) - minus.log_pdf(x));
}

double anticausal_posterior(const AnticausalModel& model, const Vec2& x) {
  return sigmoid(anticausal_logit(model, x));
}

AnticausalModel fit_qda(double q, const Vec2& mean_plus, const Vec2& mean_minus, const Mat2& second_plus,
                        const Mat2& second_minus) {
  require_q(q);
  AnticausalModel model;
  model.q = q;
  model.mu_plus = mean_plus;
  model.mu_minus = mean_minus;
  model.sigma_cond_plus = symmetrize(second_plus - mean_plus * mean_plus.transpose());
  model.sigma_cond_minus = symmetrize(second_minus - mean_minus * mean_minus.transpose());
  if (min_eig(model.sigma_cond_plus) < -kFeasibilityTol || min_eig(model.sigma_cond_minus) < -kFeasibilityTol) {
    throw InfeasibleError("class covariance is not positive semidefinite");
  }
  require_positive_definite(model.sigma_cond_plus, "class +1 covariance");
  require_positive_definite(model.sigma_cond_minus, "class -1 covariance");
  return model;
}

double phi2_upper_bound(const MomentSpec& spec) {
  require_q(spec.q);
  require_centered(spec, "phi2_upper_bound");
  if (!spec.avail_s12) throw DataError("phi2 bound needs s12");
  const double v = spec.q * (1.0 - spec.q);
  const double phi1 = spec.phi(0);
  const double denom = v * spec.sigma_x(0, 0) - phi1 * phi1;
  if (denom == 0.0) throw InfeasibleError("phi2 bound has a zero denominator");
  return v * spec.sigma_x(0, 1) * phi1 / denom;
}

Mat2 conditional_covariance_with_phi2(const MomentSpec& spec, double phi2) {
  require_q(spec.q);
  require_centered(spec, "conditional_covariance_with_phi2");
  const Vec2 phi(spec.phi(0), phi2);
  return symmetrize(spec.sigma_x - (phi * phi.transpose()) / spec.var_y());
}

std::pair<double, double> phi2_feasible_interval(const MomentSpec& spec) {
  require_q(spec.q);
  require_centered(spec, "phi2_feasible_interval");
  if (!spec.avail_s12) throw DataError("phi2 interval needs s12");
  const double c = 1.0 / spec.var_y();
  const double s1 = spec.sigma_x(0, 0);
  const double s2 = spec.sigma_x(1, 1);
  const double s12 = spec.sigma_x(0, 1);
  const double phi1 = spec.phi(0);
  const double d11 = s1 - c * phi1 * phi1;
  if (!(d11 > 0.0)) throw InfeasibleError("no phi2 makes the conditional covariance positive definite (s1^2 - c phi1^2 <= 0)");
  // det(phi2) = a phi2^2 + b phi2 + d
  const double a = -c * s1;
  const double b = 2.0 * c * phi1 * s12;
  const double d = d11 * s2 - s12 * s12;
  const double disc = b * b - 4.0 * a * d;
  if (!(disc > 0.0)) throw InfeasibleError("feasible phi2 interval is empty");
  const double sq = std::sqrt(disc);
  // numerically stable pair of roots
  const double qq = -0.5 * (b + std::copysign(sq, b));
  double r1 = qq / a;
  double r2 = (qq != 0.0) ? d / qq : -r1;
  if (r1 > r2) std::swap(r1, r2);
  return {r1, r2};
}

AnticausalModel fit_anticausal_missing_phi2(const MomentSpec& spec, ImputeStrategy strategy) {
  require_centered(spec, "fit_anticausal_missing_phi2");
  if (!spec.avail_s12) throw DataError("missing-phi2 fit needs s12");
  MomentSpec partial = spec;
  partial.avail_phi2 = false;
  require_valid(partial);

  const auto [lo, hi] = phi2_feasible_interval(partial);
  double phi2 = strategy == ImputeStrategy::PaperFormula ? phi2_upper_bound(partial)
                                                          : det_argmax_phi2(partial).phi2_star;
  AnticausalMeta meta;
  const double lo_in = lo + kClampShrink;
  const double hi_in = hi - kClampShrink;
  if (phi2 < lo_in || phi2 > hi_in) {
    const double clamped = std::clamp(phi2, lo_in, hi_in);
    meta.warnings.push_back("imputed phi2 " + std::to_string(phi2) + " left the feasible interval; clamped to " +
                            std::to_string(clamped));
    phi2 = clamped;
  }

  MomentSpec completed = partial;
  completed.phi(1) = phi2;
  completed.avail_phi2 = true;
  AnticausalModel model = fit_anticausal(completed);
  meta.imputed_phi2 = phi2;
  meta.strategy = strategy;
  model.meta = std::move(meta);
  return model;
}

AnticausalModel fit_anticausal_missing_s12(const MomentSpec& spec) {
  if (!spec.avail_phi2) throw DataError("missing-s12 fit needs phi2");
  MomentSpec partial = spec;
  partial.avail_s12 = false;
  require_valid(partial);

  const Vec2 cxy = spec.cov_xy();
  const double c = 1.0 / spec.var_y();
  Mat2 cond = Mat2::Zero();
  for (int i = 0; i < 2; ++i) {
    cond(i, i) = (spec.sigma_x(i, i) - spec.xbar(i) * spec.xbar(i)) - c * cxy(i) * cxy(i);
    if (!(cond(i, i) > 0.0)) {
      throw InfeasibleError("conditional variance of X" + std::to_string(i + 1) + " is not positive");
    }
  }
  AnticausalModel model;
  model.q = spec.q;
  std::tie(model.mu_plus, model.mu_minus) = class_means(spec);
  model.sigma_cond_plus = cond;
  model.sigma_cond_minus = cond;
  return model;
}

ImpliedMoments implied_moments(const AnticausalModel& model) {
  const double q = model.q;
  ImpliedMoments m;
  m.e_y = 2.0 * q - 1.0;
  m.e_x = q * model.mu_plus + (1.0 - q) * model.mu_minus;
  m.e_xy = q * model.mu_plus - (1.0 - q) * model.mu_minus;
  m.e_xx = q * (model.sigma_cond_plus + model.mu_plus * model.mu_plus.transpose()) +
           (1.0 - q) * (model.sigma_cond_minus + model.mu_minus * model.mu_minus.transpose());
  return m;
}

}  // namespace cmaxent
