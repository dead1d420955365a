#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "monovi/operator.hpp"

using namespace monovi;

TEST(PLaplacian, QuadraticCase) {
  const auto op = plaplacian(2.0);
  const Vec2 xi{0.3, -1.7};
  const Vec2 a = op.flux({0.5, 0.5}, xi);
  EXPECT_EQ(a[0], xi[0]);
  EXPECT_EQ(a[1], xi[1]);
  EXPECT_EQ(op.lambda, 1.0);
  EXPECT_TRUE(op.is_linear());
  EXPECT_DOUBLE_EQ(op.p_conj(), 2.0);
}

TEST(PLaplacian, CubicCase) {
  const Vec2 a = plaplacian(3.0).flux({0.0, 0.0}, {2.0, 0.0});
  EXPECT_DOUBLE_EQ(a[0], 4.0);
  EXPECT_EQ(a[1], 0.0);
  EXPECT_DOUBLE_EQ(plaplacian(3.0).p_conj(), 1.5);
}

TEST(PLaplacian, DegeneratePointIsZero) {
  const Vec2 a = plaplacian(1.5).flux({0.0, 0.0}, {0.0, 0.0});
  EXPECT_EQ(a[0], 0.0);
  EXPECT_EQ(a[1], 0.0);
}

TEST(PLaplacian, RejectsExponentAtMostOne) {
  EXPECT_THROW(plaplacian(1.0), InvalidArgument);
  EXPECT_THROW(plaplacian(0.5), InvalidArgument);
  EXPECT_THROW(weighted_plaplacian(2.0, [](const Vec2&) { return 1.0; }, 0.0, 1.0), InvalidArgument);
}

TEST(PLaplacian, WeightedConstants) {
  const auto op = weighted_plaplacian(3.0, [](const Vec2& x) { return 1.0 + x[0]; }, 1.0, 2.0);
  EXPECT_EQ(op.lambda, 1.0);
  EXPECT_EQ(op.alpha, 2.0);
  const Vec2 a = op.flux({0.5, 0.0}, {1.0, 0.0});
  EXPECT_DOUBLE_EQ(a[0], 1.5);
  EXPECT_TRUE(validate(op, 2000, 3).passed());
}

TEST(Validate, QuadraticPassesWithZeroCoercivityMargin) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto rep = validate(plaplacian(2.0), 500, seed);
    EXPECT_TRUE(rep.passed());
    EXPECT_NEAR(rep.coercivity_margin, 0.0, 1e-12);
  }
}

TEST(Validate, AntiMonotoneFluxFails) {
  OperatorSpec op;
  op.name = "negated";
  op.p = 2.0;
  op.flux = [](const Vec2&, const Vec2& xi) { return Vec2{-xi[0], -xi[1]}; };
  const auto rep = validate(op, 200, 5);
  EXPECT_FALSE(rep.monotonicity_ok);
  EXPECT_FALSE(rep.passed());
}

TEST(Validate, CubicManySamples) {
  const auto rep = validate(plaplacian(3.0), 10000, 9);
  EXPECT_TRUE(rep.passed());
  EXPECT_GT(rep.monotonicity_margin, 0.0);
}

TEST(Validate, PotentialMatchesFlux) {
  for (double p : {1.5, 2.0, 3.0, 4.5}) {
    const auto rep = validate(plaplacian(p), 1000, 17);
    EXPECT_TRUE(rep.potential_ok) << p;
    EXPECT_LE(rep.potential_error, 1e-6) << p;
  }
}

TEST(Validate, BrokenPotentialIsDetected) {
  auto op = plaplacian(2.0);
  op.potential = [](const Vec2&, const Vec2& xi) { return dot(xi, xi); };
  EXPECT_FALSE(validate(op, 100, 1).potential_ok);
}

TEST(Validate, RejectsZeroSamples) { EXPECT_THROW(validate(plaplacian(2.0), 0, 1), InvalidArgument); }
