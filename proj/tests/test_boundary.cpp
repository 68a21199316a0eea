#include <doctest.h>

#include <cmath>
#include <random>

#include "cmaxent/anticausal.hpp"
#include "cmaxent/boundary.hpp"
#include "cmaxent/causal.hpp"
#include "helpers.hpp"

using namespace cmaxent;

namespace {

Vec2 diag_solve(const Vec2& d, const Vec2& v) { return {v(0) / d(0), v(1) / d(1)}; }

// general 2x2 inverse by cofactors, independent of the library's LLT path
Vec2 cofactor_solve(const Mat2& m, const Vec2& v) {
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return Vec2(m(1, 1) * v(0) - m(0, 1) * v(1), -m(1, 0) * v(0) + m(0, 0) * v(1)) / det;
}

}  // namespace

TEST_CASE("normal vectors") {
  CHECK((normal_causal(testing::default_spec()) - Vec2(0.3, 0.1)).norm() < 1e-15);

  MomentSpec s;
  s.phi = {0.4, 0.1};
  s.sigma_x << 4, 0, 0, 1;
  CHECK((normal_causal(s) - Vec2(0.1, 0.1)).norm() < 1e-15);

  MomentSpec a;
  a.phi = {0.3, 0};
  const Vec2 na = normal_anticausal(a);
  CHECK(na(0) == doctest::Approx(0.3 / 0.91).epsilon(1e-14));
  CHECK(na(1) == 0.0);

  MomentSpec z;
  z.phi = {0, 0};
  CHECK(normal_anticausal(z).isZero(0.0));
  CHECK(normal_causal(z).isZero(0.0));

  MomentSpec singular;
  singular.sigma_x << 1, 1, 1, 1;
  singular.phi = {0.1, 0.1};
  CHECK_THROWS_AS(normal_causal(singular), InfeasibleError);

  MomentSpec partial = testing::default_spec();
  partial.avail_s12 = false;
  CHECK_THROWS_AS(normal_causal(partial), DataError);
}

TEST_CASE("normals are parallel on full specs") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 200; ++i) {
    const MomentSpec s = testing::random_spec(rng);
    const Vec2 nc = normal_causal(s);
    const Vec2 na = normal_anticausal(s);
    CHECK(parallel(nc, na, 1e-8));
    // independent cofactor computation of the same vectors
    CHECK((nc - cofactor_solve(s.sigma_x, s.phi)).norm() <= 1e-12 * (1 + nc.norm()));
    const Mat2 cond = s.sigma_x - s.phi * s.phi.transpose() / s.var_y();
    CHECK((na - cofactor_solve(cond, s.phi)).norm() <= 1e-10 * (1 + na.norm()));
  }
}

TEST_CASE("fitted boundaries agree with the analytic normals") {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 12; ++i) {
    const MomentSpec s = testing::random_spec(rng, i % 3 == 0);
    const auto causal = fit_causal(s);
    const auto anti = fit_anticausal(s);
    const auto bc = boundary_from_causal(causal);
    const auto ba = boundary_from_anticausal(anti);
    CHECK(parallel(bc.w, normal_causal(s), 1e-6));
    CHECK(parallel(ba.w, normal_anticausal(s), 1e-8));
    CHECK(parallel(bc.w, ba.w, 1e-6));
    // same orientation: both point towards the +1 side
    CHECK(bc.w.dot(ba.w) > 0.0);

    // points on each line have posterior 1/2
    for (double t : {-2.0, 0.0, 1.5}) {
      const Vec2 pc = bc.anchor() + t * bc.direction();
      const Vec2 pa = ba.anchor() + t * ba.direction();
      CHECK(std::abs(causal_posterior(causal, pc) - 0.5) <= 1e-12);
      CHECK(std::abs(anticausal_posterior(anti, pa) - 0.5) <= 1e-10);
    }
  }
}

TEST_CASE("boundary_from_causal") {
  CausalModel m;
  m.lambda = {1, 0};
  auto b = boundary_from_causal(m);
  CHECK(b.w == Vec2(1, 0));
  CHECK(b.b == 0.0);

  m.lambda0 = 1;
  m.lambda = {2, 0};
  b = boundary_from_causal(m);
  CHECK(b.anchor()(0) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(b.anchor()(1) == 0.0);
  CHECK(b.w == Vec2(1, 0));

  m.lambda = {0, 0};
  CHECK_THROWS_AS(boundary_from_causal(m), DataError);

  m.lambda = {-3, 4};
  m.lambda0 = 0.7;
  b = boundary_from_causal(m);
  CHECK(b.w.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(b.w(0) < 0.0);
  CHECK(std::abs(causal_posterior(m, b.anchor()) - 0.5) <= 1e-12);
}

TEST_CASE("boundary_from_anticausal") {
  AnticausalModel m;
  m.mu_plus = {0.3, 0};
  m.mu_minus = {-0.3, 0};
  auto b = boundary_from_anticausal(m);
  CHECK(b.w == Vec2(1, 0));
  CHECK(std::abs(b.b) < 1e-16);

  AnticausalModel skew = m;
  skew.q = 0.7;
  const auto bs = boundary_from_anticausal(skew);
  // unnormalized normal is 0.6, so the canonical offset shift is log(7/3)/0.6
  CHECK(bs.b - b.b == doctest::Approx(std::log(0.7 / 0.3) / 0.6).epsilon(1e-14));
  CHECK(std::abs(anticausal_posterior(skew, bs.anchor()) - 0.5) <= 1e-10);

  AnticausalModel same = m;
  same.mu_minus = same.mu_plus;
  CHECK_THROWS_AS(boundary_from_anticausal(same), DataError);

  AnticausalModel qda = m;
  qda.sigma_cond_minus = 2 * Mat2::Identity();
  CHECK_THROWS_AS(boundary_from_anticausal(qda), DataError);
}

TEST_CASE("parallel and angle") {
  CHECK(parallel(Vec2(1, 2), Vec2(2, 4), 1e-12));
  CHECK(parallel(Vec2(1, 2), Vec2(-2, -4), 1e-12));
  CHECK_FALSE(parallel(Vec2(1, 0), Vec2(0, 1), 1e-3));
  // vertical lines do not divide by zero
  CHECK(parallel(Vec2(0, 1), Vec2(0, 1e-30), 1e-12));
  CHECK_THROWS_AS(parallel(Vec2(0, 0), Vec2(1, 0), 1e-8), DataError);

  CHECK(angle_between(Vec2(1, 0), Vec2(0, 5)) == doctest::Approx(std::acos(0.0)).epsilon(1e-15));
  CHECK(angle_between(Vec2(1, 0), Vec2(-1, 0)) == 0.0);
  CHECK(angle_between(Vec2(1, 0), Vec2(1, 1)) == doctest::Approx(std::atan(1.0)).epsilon(1e-15));
  CHECK_THROWS_AS(angle_between(Vec2(0, 0), Vec2(1, 0)), DataError);
}

TEST_CASE("Sherman-Morrison decomposition") {
  MomentSpec z;
  z.phi = {0, 0};
  CHECK(sherman_morrison_decompose(z).k == 0.0);

  const auto d = sherman_morrison_decompose(testing::default_spec());
  CHECK(std::abs(d.k - d.k_direct) <= 1e-10);
  CHECK(d.relative_error <= 1e-12);
  // hand computation: S = diag(.91,.99) - .03 offdiag, q = .5 so c = 1
  Mat2 cond;
  cond << 0.91, -0.03, -0.03, 0.99;
  const double quad = Vec2(0.3, 0.1).dot(cofactor_solve(cond, Vec2(0.3, 0.1)));
  CHECK(d.k == doctest::Approx(-quad / (1 + quad)).epsilon(1e-14));

  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const auto r = sherman_morrison_decompose(testing::random_spec(rng));
    CHECK(1.0 + r.k > 0.0);
    CHECK(r.k <= 0.0);
    CHECK(std::abs(r.k - r.k_direct) <= 1e-9);
  }
}

TEST_CASE("partial slope ratio") {
  MomentSpec s = testing::default_spec();
  s.avail_s12 = false;
  CHECK(partial_slope_ratio(s) == doctest::Approx(0.99 / 0.91).epsilon(1e-14));
  CHECK(partial_slope_ratio(s) == doctest::Approx(1.0879).epsilon(1e-4));

  MomentSpec sym = s;
  sym.phi = {0.3, -0.3};
  CHECK(partial_slope_ratio(sym) == doctest::Approx(1.0).epsilon(1e-15));

  MomentSpec bad = s;
  bad.q = 0.5;
  bad.phi = {1.0, 0.1};
  CHECK_THROWS(partial_slope_ratio(bad));

  SUBCASE("ratio decides parallelism of the diagonal-model normals") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int nonparallel = 0;
    for (int i = 0; i < 200; ++i) {
      MomentSpec r;
      r.q = 0.5 + 0.3 * u(rng);
      const Vec2 v(1.0 + 0.8 * u(rng), 1.0 + 0.8 * u(rng));
      r.sigma_x << v(0), 0.0, 0.0, v(1);
      r.avail_s12 = false;
      const double sd = std::sqrt(r.var_y());
      r.phi = {0.9 * sd * std::sqrt(v(0)) * u(rng), 0.9 * sd * std::sqrt(v(1)) * u(rng)};
      if (i % 10 == 0) r.phi(1) = 0.0;
      if (i % 10 == 5) r.phi(1) = r.phi(0) * std::sqrt(v(1) / v(0));  // equal ratio by construction
      const double c = 1.0 / r.var_y();
      const Vec2 wc = diag_solve(v, r.phi);
      const Vec2 wa = diag_solve(Vec2(v(0) - c * r.phi(0) * r.phi(0), v(1) - c * r.phi(1) * r.phi(1)), r.phi);
      const double ratio = partial_slope_ratio(r);
      const bool expect_parallel = std::abs(ratio - 1.0) <= 1e-12 || r.phi(0) == 0.0 || r.phi(1) == 0.0;
      CHECK(parallel(wc, wa, 1e-10) == expect_parallel);
      // line slope is -w1/w2
      if (r.phi(0) != 0.0 && r.phi(1) != 0.0) {
        CHECK(ratio == doctest::Approx((wa(0) / wa(1)) / (wc(0) / wc(1))).epsilon(1e-12));
      }
      nonparallel += expect_parallel ? 0 : 1;
    }
    CHECK(nonparallel > 100);
  }
}

TEST_CASE("canonicalization") {
  const DecisionBoundary raw{Vec2(-3, 4), 2.0};
  const auto c = canonicalize(raw);
  CHECK(c.w.norm() == doctest::Approx(1.0).epsilon(1e-15));
  const auto cc = canonicalize(c);
  CHECK((cc.w - c.w).norm() <= 1e-16);
  CHECK(cc.b == doctest::Approx(c.b).epsilon(1e-15));
  CHECK_THROWS_AS(canonicalize({Vec2(0, 0), 1.0}), DataError);

  for (double t : {1e-6, 0.5, 3.0, 1e8}) {
    const DecisionBoundary scaled{t * raw.w, t * raw.b};
    const auto cs = canonicalize(scaled);
    CHECK((cs.w - c.w).norm() <= 1e-15);
    for (int i = -20; i <= 20; ++i) {
      for (int j = -20; j <= 20; ++j) {
        const Vec2 x(0.17 * i, 0.13 * j);
        CHECK(scaled.predict(x) == raw.predict(x));
        CHECK(cs.predict(x) == raw.predict(x));
      }
    }
  }
}

TEST_CASE("clip_to_box") {
  const DecisionBoundary vertical{Vec2(1, 0), -0.5};
  const auto seg = clip_to_box(vertical, Vec2(-1, -2), Vec2(1, 2));
  REQUIRE(seg);
  CHECK(seg->first(0) == doctest::Approx(0.5));
  CHECK(seg->second(0) == doctest::Approx(0.5));
  CHECK(std::abs(seg->first(1) - seg->second(1)) == doctest::Approx(4.0));

  const DecisionBoundary diag{Vec2(1, 1), 0.0};
  const auto d = clip_to_box(diag, Vec2(-1, -1), Vec2(1, 1));
  REQUIRE(d);
  CHECK((d->first - d->second).norm() == doctest::Approx(2 * std::sqrt(2.0)));
  CHECK(std::abs(diag.score(d->first)) < 1e-15);

  CHECK_FALSE(clip_to_box({Vec2(1, 0), -5.0}, Vec2(-1, -1), Vec2(1, 1)));
  CHECK_FALSE(clip_to_box({Vec2(1, 1), -5.0}, Vec2(-1, -1), Vec2(1, 1)));
}
