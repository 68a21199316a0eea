#include "cmaxent/moments.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cmaxent {

Mat2 MomentSpec::covariance() const { return sigma_x - xbar * xbar.transpose(); }

Vec2 MomentSpec::cov_xy() const { return phi - xbar * mean_y(); }

bool MomentSpec::is_centered(double tol) const { return xbar.cwiseAbs().maxCoeff() <= tol; }

SampleSet::SampleSet(std::size_t dim) : dim_(dim) {
  if (dim_ != 2 && dim_ != 4) throw DataError("sample rows must have 2 or 4 covariates");
}

void SampleSet::add(int y, std::span<const double> x) {
  if (y != 1 && y != -1) throw DataError("label must be -1 or +1, got " + std::to_string(y));
  if (x.size() != dim_) throw DataError("row has wrong number of covariates");
  for (double v : x) {
    if (!std::isfinite(v)) throw DataError("non-finite covariate value");
  }
  labels_.push_back(y);
  values_.insert(values_.end(), x.begin(), x.end());
}

void SampleSet::reserve(std::size_t rows) {
  labels_.reserve(rows);
  values_.reserve(rows * dim_);
}

MomentSpec estimate_moments(const SampleSet& samples, std::size_t first_column) {
  if (samples.empty()) throw DataError("empty sample");
  if (first_column + 2 > samples.dim()) throw DataError("covariate column out of range");

  std::size_t positives = 0;
  Vec2 sum_x = Vec2::Zero();
  Vec2 sum_xy = Vec2::Zero();
  Mat2 sum_xx = Mat2::Zero();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto row = samples.x(i);
    const Vec2 x(row[first_column], row[first_column + 1]);
    const int y = samples.label(i);
    if (y == 1) ++positives;
    sum_x += x;
    sum_xy += static_cast<double>(y) * x;
    sum_xx += x * x.transpose();
  }
  const auto n = static_cast<double>(samples.size());
  if (positives == 0 || positives == samples.size()) {
    throw DataError("sample contains a single class; q would be 0 or 1");
  }

  MomentSpec spec;
  spec.q = static_cast<double>(positives) / n;
  spec.xbar = sum_x / n;
  spec.phi = sum_xy / n;
  spec.sigma_x = sum_xx / n;
  // exact symmetry regardless of accumulation order
  spec.sigma_x(1, 0) = spec.sigma_x(0, 1);
  return spec;
}

MomentSpec center(const MomentSpec& spec) {
  MomentSpec out = spec;
  out.sigma_x = spec.covariance();
  out.sigma_x(1, 0) = out.sigma_x(0, 1);
  out.phi = spec.cov_xy();
  out.xbar.setZero();
  return out;
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::vector<Violation> validate(const MomentSpec& spec) {
  std::vector<Violation> out;
  using K = Violation::Kind;

  const bool finite = std::isfinite(spec.q) && spec.xbar.allFinite() && std::isfinite(spec.phi(0)) &&
                      (!spec.avail_phi2 || std::isfinite(spec.phi(1))) && std::isfinite(spec.sigma_x(0, 0)) &&
                      std::isfinite(spec.sigma_x(1, 1)) &&
                      (!spec.avail_s12 || (std::isfinite(spec.sigma_x(0, 1)) && std::isfinite(spec.sigma_x(1, 0))));
  if (!finite) {
    out.push_back({K::NonFinite, "moment spec contains non-finite values"});
    return out;
  }
  if (!(spec.q > 0.0 && spec.q < 1.0)) {
    out.push_back({K::Range, "q must lie strictly inside (0,1), got " + fmt(spec.q)});
    return out;
  }

  Mat2 cov = spec.covariance();
  if (spec.avail_s12) {
    if (std::abs(spec.sigma_x(0, 1) - spec.sigma_x(1, 0)) > kFeasibilityTol) {
      out.push_back({K::Symmetry, "sigma_x is not symmetric"});
    }
    cov(1, 0) = cov(0, 1);
  } else {
    // The off-diagonal is unconstrained; only the variances must be valid.
    cov(0, 1) = cov(1, 0) = 0.0;
  }
  const Eigen::SelfAdjointEigenSolver<Mat2> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kFeasibilityTol) {
    out.push_back({K::NotPsd, "covariance sigma_x - xbar xbar^T is not positive semidefinite (min eigenvalue " +
                                  fmt(eig.eigenvalues().minCoeff()) + ")"});
  }

  const Vec2 cxy = spec.cov_xy();
  const double var_y = spec.var_y();
  for (int i = 0; i < 2; ++i) {
    if (i == 1 && !spec.avail_phi2) continue;
    if (cxy(i) * cxy(i) > cov(i, i) * var_y + kFeasibilityTol) {
      out.push_back({K::CauchySchwarz, "Cov(X" + std::to_string(i + 1) + ",Y)^2 = " + fmt(cxy(i) * cxy(i)) +
                                           " exceeds Var(X" + std::to_string(i + 1) + ")Var(Y) = " +
                                           fmt(cov(i, i) * var_y)});
    }
  }

  if (spec.fully_available()) {
    const Mat2 cond = cov - (cxy * cxy.transpose()) / var_y;
    const Eigen::SelfAdjointEigenSolver<Mat2> ceig(cond, Eigen::EigenvaluesOnly);
    if (ceig.eigenvalues().minCoeff() < -kFeasibilityTol) {
      out.push_back({K::ConditionalNotPsd, "conditional covariance Sigma_{X|Y} is not positive semidefinite"});
    }
  }
  return out;
}

void require_valid(const MomentSpec& spec) {
  const auto violations = validate(spec);
  if (violations.empty()) return;
  std::string msg = "invalid moment spec:";
  bool structural = false;
  for (const auto& v : violations) {
    msg += " [" + std::string(to_string(v.kind)) + "] " + v.message + ";";
    structural = structural || v.kind == Violation::Kind::Range || v.kind == Violation::Kind::NonFinite ||
                 v.kind == Violation::Kind::Symmetry;
  }
  if (structural) throw DataError(msg);
  throw InfeasibleError(msg);
}

const char* to_string(Violation::Kind kind) {
  switch (kind) {
    case Violation::Kind::Range: return "range";
    case Violation::Kind::NonFinite: return "non-finite";
    case Violation::Kind::Symmetry: return "symmetry";
    case Violation::Kind::NotPsd: return "not-psd";
    case Violation::Kind::CauchySchwarz: return "cauchy-schwarz";
    case Violation::Kind::ConditionalNotPsd: return "conditional-not-psd";
  }
  return "unknown";
}

}  // namespace cmaxent
