#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cmaxent/types.hpp"

namespace cmaxent {

/// First and second moment constraints for a binary target Y in {-1,+1} and
/// two covariates X.
///
/// `q` is p(Y=+1), so E[Y] = 2q-1. `sigma_x` holds raw second moments
/// E[XX^T], not the covariance. When `avail_phi2` is false the value of
/// phi(1) is meaningless (NaN after parsing); likewise sigma_x off-diagonals
/// when `avail_s12` is false.
struct MomentSpec {
  double q = 0.5;
  Vec2 xbar = Vec2::Zero();
  Vec2 phi = Vec2::Zero();
  Mat2 sigma_x = Mat2::Identity();
  bool avail_phi2 = true;
  bool avail_s12 = true;

  double mean_y() const { return 2.0 * q - 1.0; }
  double var_y() const { return 4.0 * q * (1.0 - q); }
  // sigma_x - xbar xbar^T
  Mat2 covariance() const;
  // Cov(X, Y) = phi - xbar (2q-1)
  Vec2 cov_xy() const;
  bool is_centered(double tol = 1e-12) const;
  bool fully_available() const { return avail_phi2 && avail_s12; }
};

/// Labelled observations with `dim` covariates per row (2, or 4 for the
/// combined cause/effect layout).
class SampleSet {
 public:
  explicit SampleSet(std::size_t dim = 2);

  void add(int y, std::span<const double> x);
  void reserve(std::size_t rows);

  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return dim_; }
  bool empty() const { return labels_.empty(); }
  int label(std::size_t row) const { return labels_[row]; }
  std::span<const double> x(std::size_t row) const {
    return {values_.data() + row * dim_, dim_};
  }

 private:
  std::size_t dim_;
  std::vector<int> labels_;
  std::vector<double> values_;
};

/// Plain sample averages over covariate columns (first_column, first_column+1).
/// Throws DataError on empty or single-class input.
MomentSpec estimate_moments(const SampleSet& samples, std::size_t first_column = 0);

/// Shifts X to zero mean. sigma_x becomes the covariance and phi becomes
/// Cov(X, Y). Unknown entries stay unknown.
MomentSpec center(const MomentSpec& spec);

struct Violation {
  enum class Kind { Range, NonFinite, Symmetry, NotPsd, CauchySchwarz, ConditionalNotPsd };
  Kind kind;
  std::string message;
};

std::vector<Violation> validate(const MomentSpec& spec);

// Throws listing every violation: DataError for malformed values (range,
// non-finite, asymmetric), InfeasibleError when only feasibility fails.
void require_valid(const MomentSpec& spec);

const char* to_string(Violation::Kind kind);

}  // namespace cmaxent
