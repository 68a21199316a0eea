#pragma once

#include "cmaxent/types.hpp"

namespace cmaxent {

/// Bivariate normal. The covariance must be symmetric with eigenvalues > 1e-12.
struct GaussianParams {
  Vec2 mean = Vec2::Zero();
  Mat2 cov = Mat2::Identity();
};

// Throws DataError if cov is asymmetric, non-finite or not positive definite.
void require_valid(const GaussianParams& g);

/// Precomputed precision matrix and normalizer for repeated density evaluation.
class GaussianDensity {
 public:
  explicit GaussianDensity(const GaussianParams& params);

  double log_pdf(const Vec2& x) const;
  const GaussianParams& params() const { return params_; }
  const Mat2& precision() const { return precision_; }

 private:
  GaussianParams params_;
  Mat2 precision_;
  double log_norm_;
};

/// Probability mass of the axis-aligned box [lo, hi] via tensor Gauss-Legendre.
double box_mass(const GaussianDensity& density, const Vec2& lo, const Vec2& hi, std::size_t order = 6);

}  // namespace cmaxent
