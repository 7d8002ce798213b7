#pragma once

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>

#include "mpass/errors.hpp"
#include "mpass/field.hpp"

/**
 * \file segment.hpp
 *
 * @brief One-dimensional searches along line segments of a generic scalar field: sample on a uniform grid, then
 * refine the located bracket.
 */

namespace mpass {

inline constexpr int default_segment_samples = 64;

/// Slack used when comparing f against a level cap: relative, with a small absolute floor for caps near 0.
inline double level_slack(double cap) { return 1e-12 * std::abs(cap) + 1e-15; }

namespace detail {

  /// Shrink [lo, hi] with g(lo) <= 0 < g(hi) down to adjacent doubles; returns the bracket.
  template <class G>
  std::pair<double, double> bracket_crossing(G&& g, double lo, double hi) {
    std::uintmax_t max_iter = 200;
    return boost::math::tools::bisect(
        [&](double t) { return g(t) > 0 ? 1.0 : -1.0; }, lo, hi,
        [](double a, double b) { return std::nextafter(a, b) >= b; }, max_iter);
  }

}  // namespace detail

/**
 * @brief Furthest point p on [from, to] with f <= cap (+ slack) at every checked point of [from, p].
 *
 * Samples `samples` uniform points, then bisects the first violating interval. Returns `to` exactly when no sample
 * violates the cap.
 */
inline Point advance_along_segment(const ScalarField& f, const Point& from, const Point& to, double cap,
                                   int samples = default_segment_samples) {
  double const slack = level_slack(cap);
  if (f(from) > cap + slack) {
    throw PreconditionViolation("advance_along_segment: f(from) exceeds the cap");
  }
  auto excess = [&](double t) { return f(lerp(from, to, t)) - cap - slack; };
  int best = 0;
  double best_val = excess(0);
  for (int k = 1; k <= samples; ++k) {
    double const t = static_cast<double>(k) / samples;
    double const e = excess(t);
    if (e > 0) {
      double const t_prev = static_cast<double>(k - 1) / samples;
      auto const [lo, hi] = detail::bracket_crossing(excess, t_prev, t);
      return lerp(from, to, lo);
    }
    if (e >= best_val) {
      best_val = e;
      best = k;
    }
  }
  // A narrow excursion between samples sits next to the largest sample.
  double const lo = static_cast<double>(std::max(best - 1, 0)) / samples;
  double const hi = static_cast<double>(std::min(best + 1, samples)) / samples;
  auto const [t_max, neg] = boost::math::tools::brent_find_minima([&](double t) { return -excess(t); }, lo, hi,
                                                                  std::numeric_limits<double>::digits);
  if (-neg > 0) {
    double const start = t_max > static_cast<double>(best) / samples ? static_cast<double>(best) / samples : lo;
    auto const [a, b] = detail::bracket_crossing(excess, start, t_max);
    return lerp(from, to, a);
  }
  return to;
}

/**
 * @brief The point on [x0, y0] closest to x0 where f first reaches `level` (assumes f(x0) < level).
 */
inline Point first_level_crossing(const ScalarField& f, const Point& x0, const Point& y0, double level,
                                  int samples = default_segment_samples) {
  auto excess = [&](double t) { return f(lerp(x0, y0, t)) - level; };
  for (int k = 1; k <= samples; ++k) {
    double const t = static_cast<double>(k) / samples;
    if (excess(t) >= 0) {
      double const t_prev = static_cast<double>(k - 1) / samples;
      // bracket_crossing splits on g > 0; shift so that g(hi) >= 0 maps to the positive side.
      auto const [lo, hi] = detail::bracket_crossing(
          [&](double s) { return excess(s) >= 0 ? 1.0 : -1.0; }, t_prev, t);
      return lerp(x0, y0, hi);
    }
  }
  return y0;
}

/**
 * @brief Replace the lower endpoint by the first point towards the other endpoint with equal value.
 */
inline std::pair<Point, Point> equalize_endpoints(const ScalarField& f, const Point& x0, const Point& y0) {
  double const fx = f(x0);
  double const fy = f(y0);
  if (fx == fy) {
    return {x0, y0};
  }
  if (fx < fy) {
    return {first_level_crossing(f, x0, y0, fy), y0};
  }
  return {x0, first_level_crossing(f, y0, x0, fx)};
}

struct SegmentMax {
  double value;
  Point argmax;
};

/**
 * @brief max of f over [x, y]: uniform samples, then Brent refinement around the best sample.
 */
inline SegmentMax segment_max(const ScalarField& f, const Point& x, const Point& y,
                              int samples = default_segment_samples) {
  int best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= samples; ++k) {
    double const v = f(lerp(x, y, static_cast<double>(k) / samples));
    if (v > best_val) {
      best_val = v;
      best = k;
    }
  }
  double best_t = static_cast<double>(best) / samples;
  double const lo = static_cast<double>(std::max(best - 1, 0)) / samples;
  double const hi = static_cast<double>(std::min(best + 1, samples)) / samples;
  auto const [t, neg] = boost::math::tools::brent_find_minima(
      [&](double s) { return -f(lerp(x, y, s)); }, lo, hi, std::numeric_limits<double>::digits);
  if (-neg > best_val) {
    best_val = -neg;
    best_t = t;
  }
  return {best_val, lerp(x, y, best_t)};
}

}  // namespace mpass
