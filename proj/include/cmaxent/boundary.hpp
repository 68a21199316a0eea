#pragma once

#include <optional>
#include <utility>

#include "cmaxent/anticausal.hpp"
#include "cmaxent/causal.hpp"
#include "cmaxent/moments.hpp"

namespace cmaxent {

/// Linear MAP rule: predict +1 iff w.x + b > 0.
///
/// The canonical form scales (w, b) so that |w| = 1. Only positive scalings
/// preserve the rule, so the orientation of w is never flipped: w always
/// points towards the +1 side.
struct DecisionBoundary {
  Vec2 w = Vec2(1.0, 0.0);
  double b = 0.0;

  double score(const Vec2& x) const { return w.dot(x) + b; }
  int predict(const Vec2& x) const { return score(x) > 0.0 ? 1 : -1; }
  /// Point on the line closest to the origin.
  Vec2 anchor() const { return -b * w / w.squaredNorm(); }
  /// Unit vector along the line.
  Vec2 direction() const { return Vec2(-w(1), w(0)).normalized(); }
};

DecisionBoundary canonicalize(const DecisionBoundary& boundary);

/// Cov(X)^{-1} Cov(X, Y); equals Sigma_X^{-1} phi for centred specs.
Vec2 normal_causal(const MomentSpec& spec);

/// Sigma_{X|Y}^{-1} Cov(X, Y). Zero when Cov(X, Y) = 0.
Vec2 normal_anticausal(const MomentSpec& spec);

/// w = lambda, b = lambda0. Throws DataError when lambda = 0.
DecisionBoundary boundary_from_causal(const CausalModel& model);

/// w = Sigma^{-1}(mu+ - mu-), b = -1/2 (mu+ - mu-)^T Sigma^{-1} (mu+ + mu-) + log(q/(1-q)).
/// Needs a shared covariance; throws DataError when mu+ = mu-.
DecisionBoundary boundary_from_anticausal(const AnticausalModel& model);

/// |w1 x w2| <= tol |w1| |w2|. Throws DataError on a zero vector.
bool parallel(const Vec2& w1, const Vec2& w2, double tol);

/// Angle between the two lines with these normals, in [0, pi/2].
double angle_between(const Vec2& w1, const Vec2& w2);

struct ShermanMorrison {
  double k = 0.0;              // closed form
  double k_direct = 0.0;       // from the vectors themselves
  double relative_error = 0.0; // |Sigma_X^{-1}phi - (1+k) Sigma_{X|Y}^{-1}phi| / |Sigma_X^{-1}phi|
};

/// Sigma_X^{-1} phi = (1 + k) Sigma_{X|Y}^{-1} phi with
/// k = -c phi^T S^{-1} phi / (1 + c phi^T S^{-1} phi), S = Sigma_{X|Y}.
/// Throws InfeasibleError if the identity fails by more than 1e-10.
ShermanMorrison sherman_morrison_decompose(const MomentSpec& spec);

/// Ratio of the anticausal to causal boundary slopes when s12 is unknown:
///   ((v2 - c phi2^2) v1) / ((v1 - c phi1^2) v2),  v_i = Var(X_i).
/// The two normals are parallel iff the ratio is 1 or some phi_i = 0.
double partial_slope_ratio(const MomentSpec& spec);

/// Segment of the boundary line inside the box [lo, hi]; empty if it misses.
std::optional<std::pair<Vec2, Vec2>> clip_to_box(const DecisionBoundary& boundary, const Vec2& lo, const Vec2& hi);

}  // namespace cmaxent
