#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <utility>
#include <variant>

#include "mpass/errors.hpp"

/**
 * \file field.hpp
 *
 * @brief Scalar fields on R^n and the open regions the solvers are restricted to.
 */

namespace mpass {

using Point = Eigen::VectorXd;

namespace detail {

  /// Copyable atomic counter; copies snapshot the current value.
  class Counter {
   public:
    Counter() = default;
    Counter(const Counter& other) : value_(other.value_.load(std::memory_order_relaxed)) {}
    Counter& operator=(const Counter& other) {
      value_.store(other.value_.load(std::memory_order_relaxed), std::memory_order_relaxed);
      return *this;
    }

    void bump() const { value_.fetch_add(1, std::memory_order_relaxed); }
    std::size_t get() const { return value_.load(std::memory_order_relaxed); }
    void reset() const { value_.store(0, std::memory_order_relaxed); }

   private:
    mutable std::atomic<std::size_t> value_{0};
  };

}  // namespace detail

/**
 * @brief An evaluatable map R^n -> R with an optional analytic gradient.
 *
 * Evaluation is pure; the call counters are the only mutable state and are atomic, so a field may be shared by
 * concurrent read-only evaluators. Counters take no part in comparisons.
 */
class ScalarField {
 public:
  using Value = std::function<double(const Point&)>;
  using Gradient = std::function<Point(const Point&)>;

  ScalarField(int dimension, Value value, Gradient gradient = {})
      : dimension_(dimension), value_(std::move(value)), gradient_(std::move(gradient)) {
    if (dimension_ <= 0) {
      throw InvalidArgument("ScalarField: dimension must be positive");
    }
    if (!value_) {
      throw InvalidArgument("ScalarField: missing evaluation function");
    }
  }

  int dimension() const { return dimension_; }

  double operator()(const Point& x) const {
    if (x.size() != dimension_) {
      throw InvalidArgument("ScalarField: point dimension differs from the field");
    }
    eval_count_.bump();
    return value_(x);
  }

  bool has_gradient() const { return static_cast<bool>(gradient_); }

  /// Analytic gradient. Only valid when has_gradient().
  Point gradient(const Point& x) const {
    grad_count_.bump();
    return gradient_(x);
  }

  /// Analytic gradient if present, else central differences with step 1e-6 * (1 + |x|).
  Point gradient_or_fd(const Point& x) const {
    if (has_gradient()) {
      return gradient(x);
    }
    return fd_gradient(x);
  }

  Point fd_gradient(const Point& x) const {
    double const h = 1e-6 * (1.0 + x.norm());
    Point g(x.size());
    Point probe = x;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      probe[j] = x[j] + h;
      double const up = (*this)(probe);
      probe[j] = x[j] - h;
      double const down = (*this)(probe);
      probe[j] = x[j];
      g[j] = (up - down) / (2 * h);
    }
    return g;
  }

  std::size_t eval_count() const { return eval_count_.get(); }
  std::size_t grad_count() const { return grad_count_.get(); }
  void reset_counters() const {
    eval_count_.reset();
    grad_count_.reset();
  }

 private:
  int dimension_;
  Value value_;
  Gradient gradient_;
  detail::Counter eval_count_;
  detail::Counter grad_count_;
};

/// x -> sum_j diag_j x_j^2, with exact gradient.
inline ScalarField make_quadratic_field(const Eigen::VectorXd& diag) {
  if (diag.size() == 0) {
    throw InvalidArgument("make_quadratic_field: empty diagonal");
  }
  return ScalarField(
      static_cast<int>(diag.size()),
      [diag](const Point& x) { return (diag.array() * x.array().square()).sum(); },
      [diag](const Point& x) -> Point { return 2.0 * diag.cwiseProduct(x); });
}

/**
 * @brief The open set U a search is restricted to: a ball or an axis-aligned box.
 *
 * contains() tests the closure, interior() the open set.
 */
class Region {
 public:
  struct Ball {
    Point center;
    double radius;
  };
  struct Box {
    Point lower;
    Point upper;
  };

  static Region ball(Point center, double radius) {
    if (!(radius > 0) || !std::isfinite(radius)) {
      throw InvalidArgument("Region::ball: radius must be positive");
    }
    return Region(Ball{std::move(center), radius});
  }

  static Region box(Point lower, Point upper) {
    if (lower.size() != upper.size() || lower.size() == 0) {
      throw InvalidArgument("Region::box: corner dimensions differ");
    }
    if (!(lower.array() < upper.array()).all()) {
      throw InvalidArgument("Region::box: lower must be below upper componentwise");
    }
    return Region(Box{std::move(lower), std::move(upper)});
  }

  int dimension() const {
    return std::visit([](const auto& k) { return static_cast<int>(corner_dim(k)); }, kind_);
  }

  bool is_ball() const { return std::holds_alternative<Ball>(kind_); }
  const Ball* as_ball() const { return std::get_if<Ball>(&kind_); }
  const Box* as_box() const { return std::get_if<Box>(&kind_); }

  bool contains(const Point& x) const {
    if (const auto* b = as_ball()) {
      return (x - b->center).norm() <= b->radius;
    }
    const auto& bx = std::get<Box>(kind_);
    return (x.array() >= bx.lower.array()).all() && (x.array() <= bx.upper.array()).all();
  }

  bool interior(const Point& x) const {
    if (const auto* b = as_ball()) {
      return (x - b->center).norm() < b->radius;
    }
    const auto& bx = std::get<Box>(kind_);
    return (x.array() > bx.lower.array()).all() && (x.array() < bx.upper.array()).all();
  }

  /// Smallest axis-aligned box containing the region.
  std::pair<Point, Point> bounding_box() const {
    if (const auto* b = as_ball()) {
      Point const r = Point::Constant(b->center.size(), b->radius);
      return {b->center - r, b->center + r};
    }
    const auto& bx = std::get<Box>(kind_);
    return {bx.lower, bx.upper};
  }

  double diameter() const {
    if (const auto* b = as_ball()) {
      return 2 * b->radius;
    }
    const auto& bx = std::get<Box>(kind_);
    return (bx.upper - bx.lower).norm();
  }

  /**
   * @brief Parameter interval {t : origin + t * dir in closure}, or nullopt when the line misses the region.
   */
  std::optional<std::pair<double, double>> clip_line(const Point& origin, const Point& dir) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (const auto* b = as_ball()) {
      // |origin - c + t dir|^2 = r^2
      Point const w = origin - b->center;
      double const a = dir.squaredNorm();
      if (a == 0) {
        return contains(origin) ? std::optional(std::pair{-inf, inf}) : std::nullopt;
      }
      double const half_b = w.dot(dir);
      double const c = w.squaredNorm() - b->radius * b->radius;
      double const disc = half_b * half_b - a * c;
      if (disc < 0) {
        return std::nullopt;
      }
      double const s = std::sqrt(disc);
      return std::pair{(-half_b - s) / a, (-half_b + s) / a};
    }
    const auto& bx = std::get<Box>(kind_);
    double lo = -inf;
    double hi = inf;
    for (Eigen::Index j = 0; j < origin.size(); ++j) {
      if (dir[j] == 0) {
        if (origin[j] < bx.lower[j] || origin[j] > bx.upper[j]) {
          return std::nullopt;
        }
        continue;
      }
      double t0 = (bx.lower[j] - origin[j]) / dir[j];
      double t1 = (bx.upper[j] - origin[j]) / dir[j];
      if (t0 > t1) {
        std::swap(t0, t1);
      }
      lo = std::max(lo, t0);
      hi = std::min(hi, t1);
    }
    if (lo > hi) {
      return std::nullopt;
    }
    return std::pair{lo, hi};
  }

 private:
  explicit Region(std::variant<Ball, Box> kind) : kind_(std::move(kind)) {}

  static Eigen::Index corner_dim(const Ball& b) { return b.center.size(); }
  static Eigen::Index corner_dim(const Box& b) { return b.lower.size(); }

  std::variant<Ball, Box> kind_;
};

/// Point on the segment [from, to] at parameter t in [0, 1]; t = 1 returns `to` bit-exactly.
inline Point lerp(const Point& from, const Point& to, double t) {
  if (t >= 1.0) {
    return to;
  }
  if (t <= 0.0) {
    return from;
  }
  return from + t * (to - from);
}

}  // namespace mpass
