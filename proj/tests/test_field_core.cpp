#include <gtest/gtest.h>

#include "support.hpp"

namespace mpass {
namespace {

using test::pt;

TEST(QuadraticField, Values) {
  auto const f = make_quadratic_field(detail::vec({1, -1}));
  EXPECT_DOUBLE_EQ(f(pt(0, 0)), 0.0);
  EXPECT_DOUBLE_EQ(f(pt(2, 1)), 3.0);
}

TEST(QuadraticField, Gradient) {
  auto const f = make_quadratic_field(detail::vec({3, 2, -1}));
  Point const g = f.gradient(pt(1, 1, 1));
  EXPECT_DOUBLE_EQ(g[0], 6.0);
  EXPECT_DOUBLE_EQ(g[1], 4.0);
  EXPECT_DOUBLE_EQ(g[2], -2.0);
}

TEST(QuadraticField, EmptyDiagonalRejected) { EXPECT_THROW(make_quadratic_field(Eigen::VectorXd()), InvalidArgument); }

TEST(ScalarField, FiniteDifferenceGradientMatchesAnalytic) {
  auto const p = *find_problem("double-well-curve");
  Point const x = pt(0.9, 1.3);
  EXPECT_LT((p.field.fd_gradient(x) - p.field.gradient(x)).norm(), 1e-7);
}

TEST(ScalarField, FallsBackToFiniteDifferences) {
  auto const p = *find_problem("sqrt-cusp-2d");
  EXPECT_FALSE(p.field.has_gradient());
  Point const g = p.field.gradient_or_fd(pt(1, 0.5));
  EXPECT_NEAR(g[0], -0.5, 1e-6);
  EXPECT_NEAR(g[1], 1.0, 1e-6);
}

TEST(ScalarField, CountsEvaluations) {
  auto const f = make_quadratic_field(detail::vec({1, -1}));
  f.reset_counters();
  (void)f(pt(1, 1));
  (void)f(pt(1, 2));
  (void)f.gradient(pt(1, 2));
  EXPECT_EQ(f.eval_count(), 2u);
  EXPECT_EQ(f.grad_count(), 1u);
}

TEST(ScalarField, DimensionMismatchRejected) {
  auto const f = make_quadratic_field(detail::vec({1, -1}));
  EXPECT_THROW((void)f(pt(1, 2, 3)), InvalidArgument);
}

TEST(Region, BoxMembership) {
  auto const r = Region::box(pt(-1, -2), pt(1, 2));
  EXPECT_TRUE(r.contains(pt(1, 2)));
  EXPECT_FALSE(r.interior(pt(1, 0)));
  EXPECT_TRUE(r.interior(pt(0.5, 0)));
  EXPECT_FALSE(r.contains(pt(1.1, 0)));
  EXPECT_NEAR(r.diameter(), std::sqrt(20.0), 1e-15);
}

TEST(Region, BallClipLine) {
  auto const r = Region::ball(pt(0, 0), 2);
  auto const seg = r.clip_line(pt(0, 0), pt(1, 0));
  ASSERT_TRUE(seg.has_value());
  EXPECT_NEAR(seg->first, -2, 1e-14);
  EXPECT_NEAR(seg->second, 2, 1e-14);
  EXPECT_FALSE(r.clip_line(pt(0, 3), pt(1, 0)).has_value());
}

TEST(Region, InvalidBoxRejected) { EXPECT_THROW(Region::box(pt(1, 0), pt(0, 1)), InvalidArgument); }

TEST(Catalog, QuadraticSaddleKnownValue) {
  auto const p = find_problem("quadratic-saddle");
  ASSERT_TRUE(p.has_value());
  ASSERT_TRUE(p->known_saddle.has_value());
  EXPECT_EQ(p->known_saddle->value, 0.0);
}

TEST(Catalog, DoubleWellVanishesAtContact) {
  auto const p = *find_problem("double-well-curve");
  EXPECT_EQ(p.field(pt(1, 1)), 0.0);
}

TEST(Catalog, SqrtCusp) {
  auto const p = *find_problem("sqrt-cusp");
  EXPECT_DOUBLE_EQ(p.field(detail::vec({4})), -2.0);
}

TEST(Catalog, UnknownName) { EXPECT_FALSE(find_problem("no-such-problem").has_value()); }

TEST(Catalog, EndpointsInsideRegionAndBelowSaddle) {
  for (auto const& p : builtin_problems()) {
    SCOPED_TRACE(p.name);
    EXPECT_TRUE(p.region.contains(p.a));
    EXPECT_TRUE(p.region.contains(p.b));
    if (p.known_saddle) {
      EXPECT_LT(p.field(p.a), p.known_saddle->value);
      EXPECT_LT(p.field(p.b), p.known_saddle->value);
      EXPECT_NEAR(p.field(p.known_saddle->point), p.known_saddle->value, 1e-14);
    }
  }
}

}  // namespace
}  // namespace mpass
