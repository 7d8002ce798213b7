#include <gtest/gtest.h>

#include <chrono>

#include "support.hpp"

namespace mpass {
namespace {

using test::pt;

ScalarField linear_field() {
  return ScalarField(1, [](const Point& x) { return x[0]; });
}

TEST(Equalize, EqualValuesUnchanged) {
  auto const p = *find_problem("quadratic-saddle");
  auto const [x, y] = equalize_endpoints(p.field, p.a, p.b);
  EXPECT_EQ(x, p.a);
  EXPECT_EQ(y, p.b);
}

TEST(Equalize, MovesLowerEndpoint) {
  auto const p = *find_problem("quadratic-saddle");
  auto const [x, y] = equalize_endpoints(p.field, pt(0, -2), pt(0, 1));
  EXPECT_NEAR((x - pt(0, -1)).norm(), 0, 1e-12);
  EXPECT_EQ(y, pt(0, 1));
}

TEST(Equalize, PsFailCrossingMatchesScan) {
  auto const p = *find_problem("ps-fail-a");
  Point const x0 = pt(1, -1.5);
  Point const y0 = pt(3, 1.0);
  ASSERT_LT(p.field(x0), p.field(y0));
  auto const [x, y] = equalize_endpoints(p.field, x0, y0);

  double const level = p.field(y0);
  auto excess = [&](double t) { return p.field(lerp(x0, y0, t)) - level; };
  int const n = 100000;
  int k = 1;
  while (k <= n && excess(static_cast<double>(k) / n) < 0) {
    ++k;
  }
  ASSERT_LE(k, n);
  double lo = static_cast<double>(k - 1) / n;
  double hi = static_cast<double>(k) / n;
  for (int it = 0; it < 60; ++it) {
    double const mid = 0.5 * (lo + hi);
    (excess(mid) < 0 ? lo : hi) = mid;
  }
  EXPECT_LT((x - lerp(x0, y0, hi)).norm(), 1e-8);
  EXPECT_EQ(y, y0);
}

TEST(Advance, MonotoneSegmentReachesTarget) {
  auto const p = *find_problem("quadratic-saddle");
  EXPECT_EQ(advance_along_segment(p.field, pt(0, -1), pt(0, -0.5), -0.25), pt(0, -0.5));
}

TEST(Advance, StopsAtCap) {
  auto const f = linear_field();
  Point const q = advance_along_segment(f, detail::vec({0}), detail::vec({1}), 0.5);
  EXPECT_NEAR(q[0], 0.5, 1e-12);
}

TEST(Advance, StartAboveCapRejected) {
  auto const f = linear_field();
  EXPECT_THROW(advance_along_segment(f, detail::vec({1}), detail::vec({0}), 0.5), PreconditionViolation);
}

TEST(SegmentMax, QuadraticSaddle) {
  auto const p = *find_problem("quadratic-saddle");
  auto const m = segment_max(p.field, pt(0, -1), pt(0, 1));
  EXPECT_NEAR(m.value, 0, 1e-15);
  EXPECT_LT(m.argmax.norm(), 1e-7);
}

TEST(SegmentMax, LinearAtEndpoint) {
  auto const f = linear_field();
  auto const m = segment_max(f, detail::vec({-1}), detail::vec({2}));
  EXPECT_DOUBLE_EQ(m.value, 2.0);
}

TEST(Bisector, QuadraticSaddle) {
  auto const p = *find_problem("quadratic-saddle");
  auto const m = bisector_minimize(p.field, p.region, pt(0, -1), pt(0, 1));
  EXPECT_LT(m.z.norm(), 1e-12);
  EXPECT_NEAR(m.f_z, 0, 1e-20);
}

TEST(Bisector, Quadratic3d) {
  auto const p = *find_problem("quadratic-3d");
  auto const m = bisector_minimize(p.field, p.region, pt(0, 0, -1), pt(0, 0, 1));
  EXPECT_LT(m.z.norm(), 1e-10);
}

TEST(Bisector, TiltedPairMatchesLineSearchOracle) {
  auto const p = *find_problem("perturbed-quadratic");
  Point const x = pt(0.1, -1);
  Point const y = pt(-0.1, 1);
  auto const m = bisector_minimize(p.field, p.region, x, y);

  Point const mid = 0.5 * (x + y);
  Point const d = x - y;
  Point const t = pt(-d[1], d[0]).normalized();
  auto const range = p.region.clip_line(mid, t);
  ASSERT_TRUE(range.has_value());
  auto g = [&](double s) { return p.field(mid + s * t); };
  double lo = range->first;
  double hi = range->second;
  double const r = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200; ++it) {
    double const c = hi - r * (hi - lo);
    double const e = lo + r * (hi - lo);
    (g(c) < g(e) ? hi : lo) = g(c) < g(e) ? e : c;
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 5; ++it) {
    double const h = 1e-5;
    double const d1 = (g(s + h) - g(s - h)) / (2 * h);
    double const d2 = (g(s + h) - 2 * g(s) + g(s - h)) / (h * h);
    s -= d1 / d2;
  }
  EXPECT_LT((m.z - (mid + s * t)).norm(), 1e-10);
}

TEST(Bisector, CoincidentPointsRejected) {
  auto const p = *find_problem("quadratic-saddle");
  EXPECT_THROW(bisector_minimize(p.field, p.region, pt(0, 1), pt(0, 1)), InvalidArgument);
}

TEST(RunLocal, OneStepQuadratic2d) {
  auto const f = make_quadratic_field(detail::vec({1, -1}));
  auto const region = Region::box(pt(-2, -2), pt(2, 2));
  auto const t0 = std::chrono::steady_clock::now();
  auto const r = run_local(f, region, pt(0, -1), pt(0, 1));
  auto const secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  ASSERT_TRUE(r.converged());
  EXPECT_LT(r.records.front().z.norm(), 1e-12);
  EXPECT_LT(secs, 0.1);
}

TEST(RunLocal, OneStepQuadratic3d) {
  auto const f = make_quadratic_field(detail::vec({2, 3, -1}));
  auto const region = Region::box(pt(-2, -2, -2), pt(2, 2, 2));
  auto const r = run_local(f, region, pt(0, 0, -1), pt(0, 0, 1));
  ASSERT_TRUE(r.converged());
  EXPECT_LT(r.records.front().z.norm(), 1e-12);
}

/// Damped Newton on grad f = 0 from a point near the saddle.
Point newton_critical_point(const ScalarField& f, Point x) {
  for (int it = 0; it < 100; ++it) {
    Point const g = f.gradient(x);
    if (g.norm() < 1e-15) {
      break;
    }
    Eigen::MatrixXd const h = gradient_fd_hessian(f, x);
    Point const step = h.fullPivLu().solve(-g);
    double lambda = 1;
    while (lambda > 1e-8 && f.gradient(x + lambda * step).norm() >= g.norm()) {
      lambda /= 2;
    }
    x += lambda * step;
  }
  return x;
}

TEST(RunLocal, PerturbedQuadraticWithClosestPairStep) {
  auto const p = *find_problem("perturbed-quadratic");
  Point const saddle = newton_critical_point(p.field, pt(0.05, -0.05));
  ASSERT_LT(saddle.norm(), 1e-12);
  LocalOptions opts;
  opts.do_step_1a = true;
  auto const r = run_local(p.field, p.region, pt(0.3, -0.8), pt(-0.2, 0.9), opts);
  ASSERT_TRUE(r.converged());
  EXPECT_LE(r.records.size(), 2u);
  EXPECT_LT((r.records.back().z - saddle).norm(), 1e-12);
}

TEST(RunLocal, PerturbedQuadraticDefaultOptions) {
  auto const p = *find_problem("perturbed-quadratic");
  Point const saddle = newton_critical_point(p.field, pt(0.05, -0.05));
  LocalOptions opts;
  opts.point_tol = 1e-14;
  auto const r = run_local(p.field, p.region, pt(0.3, -0.8), pt(-0.2, 0.9), opts);
  ASSERT_TRUE(r.converged());
  EXPECT_LT((r.records.back().z - saddle).norm(), 1e-7);

  double const v = p.field(saddle);
  bool fast_step = false;
  for (std::size_t i = 0; i + 1 < r.records.size(); ++i) {
    auto const& cur = r.records[i];
    auto const& next = r.records[i + 1];
    EXPECT_GE(next.f_x, cur.f_x);
    if (i < 5) {
      fast_step = fast_step || (next.x - saddle).norm() < 0.1 * (cur.x - saddle).norm();
    }
    if (i >= 2) {
      EXPECT_LE(cur.M - v, v - cur.f_x + 1e-15) << "iteration " << i;
    }
  }
  EXPECT_TRUE(fast_step);
}

TEST(RunLocal, BracketsKnownSaddleValue) {
  for (auto const& p : builtin_problems()) {
    if (!p.known_saddle || p.field.dimension() < 2) {
      continue;
    }
    SCOPED_TRACE(p.name);
    auto const r = run_local(p.field, p.region, p.a, p.b);
    double const v = p.known_saddle->value;
    for (auto const& rec : r.records) {
      EXPECT_LE(rec.f_z, v + 1e-12);
      EXPECT_GE(rec.M, v - 1e-12);
    }
  }
}

TEST(RunLocal, LateIterationsReachBisectorMinimizer) {
  auto const p = *find_problem("perturbed-quadratic");
  LocalOptions opts;
  opts.point_tol = 1e-13;
  auto const r = run_local(p.field, p.region, pt(0.3, -0.8), pt(-0.2, 0.9), opts);
  ASSERT_GE(r.records.size(), 3u);
  for (std::size_t i = 1; i < r.records.size(); ++i) {
    auto const& rec = r.records[i];
    if (!rec.x_next) {
      continue;
    }
    SCOPED_TRACE(i);
    EXPECT_TRUE(rec.x_reached_z || rec.y_reached_z);
    const Point& from = rec.x_reached_z ? rec.x : rec.y;
    double worst = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 100000; k += 7) {
      worst = std::max(worst, p.field(lerp(from, rec.z, k / 100000.0)) - rec.f_z);
    }
    EXPECT_LE(worst, 1e-12);
  }
}

TEST(RunLocal, BoundaryHitReported) {
  auto const p = *find_problem("ps-fail-a");
  auto const r = run_local(p.field, p.region, p.a, p.b);
  EXPECT_EQ(r.status, LocalStatus::boundary_hit);
  ASSERT_TRUE(r.boundary_point.has_value());
  EXPECT_NEAR((*r.boundary_point)[0], 10, 1e-9);
}

TEST(RunLocal, StepOneAConverges) {
  auto const p = *find_problem("double-well-curve");
  LocalOptions opts;
  opts.do_step_1a = true;
  auto const r = run_local(p.field, p.region, p.a, p.b, opts);
  ASSERT_TRUE(r.converged());
  EXPECT_LT((r.records.back().z - p.known_saddle->point).norm(), 1e-6);
}

TEST(RunLocal, InvalidOptions) {
  auto const p = *find_problem("quadratic-saddle");
  LocalOptions opts;
  opts.point_tol = 0;
  EXPECT_THROW(run_local(p.field, p.region, p.a, p.b, opts), InvalidArgument);
}

TEST(RunLocal, PathJoinsEndpointsAboveFinalLevel) {
  auto const p = *find_problem("perturbed-quadratic");
  auto const r = run_local(p.field, p.region, pt(0.3, -0.8), pt(-0.2, 0.9));
  auto const path = assemble_local_path(p.field, r.records);
  auto const [x0, y0] = equalize_endpoints(p.field, pt(0.3, -0.8), pt(-0.2, 0.9));
  EXPECT_EQ(path.vertices.front(), x0);
  EXPECT_EQ(path.vertices.back(), y0);
  EXPECT_GE(path.max_value, r.records.back().f_x - 1e-14);
  EXPECT_LE(path.max_value, r.records.back().M + 1e-10);
}

TEST(ClosestPair, OptimalPairUnchanged) {
  auto const p = *find_problem("quadratic-saddle");
  double const e = 0.04;
  Point const x = pt(0, -std::sqrt(e));
  Point const y = pt(0, std::sqrt(e));
  auto const cp = refine_closest_pair(p.field, p.region, x, y, -e);
  EXPECT_FALSE(cp.connected);
  EXPECT_LT((cp.x - x).norm(), 1e-12);
  EXPECT_LT((cp.y - y).norm(), 1e-12);
}

TEST(ClosestPair, ConvergesFromPerturbedPair) {
  auto const p = *find_problem("quadratic-saddle");
  double const e = 0.04;
  double const h = std::sqrt(e + 0.05 * 0.05);
  auto const cp = refine_closest_pair(p.field, p.region, pt(0.05, -h), pt(-0.05, h), -e);
  EXPECT_FALSE(cp.connected);
  EXPECT_LT((cp.x - pt(0, -0.2)).norm(), 1e-6);
  EXPECT_LT((cp.y - pt(0, 0.2)).norm(), 1e-6);
  auto const rep = check_pair_optimality(p.field, cp.x, cp.y, -e);
  EXPECT_LE(rep.residual_x, 1e-6);
  EXPECT_LE(rep.residual_y, 1e-6);
}

TEST(ClosestPair, FlagsPairHeldByBoundary) {
  // No closest pair exists in the plane; the refinement runs into the box edge at x = 10.
  auto const p = *find_problem("ps-fail-a");
  auto const cp = refine_closest_pair(p.field, p.region, p.a, p.b, std::max(p.field(p.a), p.field(p.b)));
  EXPECT_TRUE(cp.on_boundary);
  EXPECT_NEAR(cp.x[0], 10, 1e-12);

  auto const q = *find_problem("quadratic-saddle");
  EXPECT_FALSE(refine_closest_pair(q.field, q.region, pt(0, -0.2), pt(0, 0.2), -0.04).on_boundary);
}

TEST(ClosestPair, PointAboveLevelRejected) {
  auto const p = *find_problem("quadratic-saddle");
  EXPECT_THROW(refine_closest_pair(p.field, p.region, pt(0.05, -0.2), pt(-0.05, 0.2), -0.04), PreconditionViolation);
}

TEST(ClosestPair, DetectsSharedComponent) {
  auto const p = *find_problem("quadratic-saddle");
  auto const cp = refine_closest_pair(p.field, p.region, pt(0, -1), pt(0, 1), 0.5);
  EXPECT_TRUE(cp.connected);
}

}  // namespace
}  // namespace mpass
