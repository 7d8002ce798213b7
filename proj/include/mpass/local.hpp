#pragma once

#include <cmath>
#include <concepts>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpass/closest_pair.hpp"
#include "mpass/errors.hpp"
#include "mpass/field.hpp"
#include "mpass/hyperplane.hpp"
#include "mpass/path.hpp"
#include "mpass/segment.hpp"

/**
 * \file local.hpp
 *
 * @brief Fast local level set iteration for saddle points of mountain pass type.
 *
 * Two points x_i, y_i with f(x_i) = f(y_i) are kept below the critical value. Each iteration minimizes f on the
 * perpendicular bisector hyperplane of the pair (z_i, a lower bound on the critical value), then advances both
 * points towards z_i as long as f stays below f(z_i). The maximum M_i of f on [x_i, y_i] is an upper bound. Near a
 * nondegenerate critical point of Morse index 1 both bounds converge superlinearly.
 */

namespace mpass {

struct LocalOptions {
  /// Stop when |x_i - y_i| <= point_tol.
  double point_tol = 1e-10;
  /// Stop when M_i - f(x_i) <= gap_tol * max(1, |f(x_i)|).
  double gap_tol = 1e-12;
  int max_iter = 50;
  /// Run the closest-pair refinement before every bisector minimization.
  bool do_step_1a = false;
  int segment_search_samples = default_segment_samples;
  double bisector_min_tol = 1e-12;

  void validate() const {
    if (!(point_tol > 0) || !(gap_tol > 0) || !(bisector_min_tol > 0) || max_iter < 0 || segment_search_samples < 2) {
      throw InvalidArgument("LocalOptions: tolerances must be positive");
    }
  }
};

/// One iteration of the local algorithm.
struct LocalIterate {
  int index = 0;
  Point x;
  Point y;
  /// Minimizer of f on the bisector hyperplane of (x, y).
  Point z;
  double f_x = 0;
  double f_y = 0;
  double f_z = 0;
  /// max of f on [x, y].
  double M = 0;
  Point argmax;
  double dist = 0;
  /// (M - f_x)/|f_x|, or M - f_x when f_x = 0.
  double gap_ratio = 0;
  /// Closest-pair refinement was applied to (x, y) before this record.
  bool refined = false;
  /// Points produced by the advance step; empty on the final record.
  std::optional<Point> x_next;
  std::optional<Point> y_next;
  bool x_reached_z = false;
  bool y_reached_z = false;
};

enum class LocalStatus { converged, max_iterations, boundary_hit };

inline const char* to_string(LocalStatus s) {
  switch (s) {
    case LocalStatus::converged:
      return "converged";
    case LocalStatus::max_iterations:
      return "max-iterations";
    case LocalStatus::boundary_hit:
      return "boundary-hit";
  }
  return "unknown";
}

struct LocalResult {
  std::vector<LocalIterate> records;
  LocalStatus status = LocalStatus::max_iterations;
  std::optional<Point> boundary_point;

  bool converged() const { return status == LocalStatus::converged; }
};

struct LineMinimum {
  Point z;
  double value;
};

/**
 * @brief The one-dimensional subproblems of the local iteration, specialized per field.
 */
template <class S>
concept LocalSubsolver = requires(const S& s, const Point& p, const Point& q, double cap) {
  { s.field() } -> std::convertible_to<const ScalarField&>;
  { s.region() } -> std::convertible_to<const Region&>;
  { s.equalize(p, q) } -> std::same_as<std::pair<Point, Point>>;
  { s.bisector_minimum(p, q) } -> std::same_as<LineMinimum>;
  { s.advance(p, q, cap) } -> std::same_as<Point>;
  { s.segment_max(p, q) } -> std::same_as<SegmentMax>;
};

/**
 * @brief Subproblems of a generic field: sampled segment searches and hyperplane minimization.
 */
class FieldSubsolver {
 public:
  FieldSubsolver(const ScalarField& f, const Region& region, const LocalOptions& opts = {})
      : field_(&f), region_(&region), opts_(opts) {}

  const ScalarField& field() const { return *field_; }
  const Region& region() const { return *region_; }

  std::pair<Point, Point> equalize(const Point& x0, const Point& y0) const {
    return equalize_endpoints(*field_, x0, y0);
  }

  /// Global minimizer on the bisector; when that leaves the pair's basin (not above both points, or on the boundary),
  /// the minimizer reached by descending from the midpoint instead.
  LineMinimum bisector_minimum(const Point& x, const Point& y) const {
    double const top = std::max((*field_)(x), (*field_)(y));
    try {
      auto m = bisector_minimize(*field_, *region_, x, y, opts_.bisector_min_tol);
      if (m.f_z > top + level_slack(top)) {
        return {std::move(m.z), m.f_z};
      }
    } catch (const BoundaryHit&) {
    }
    Point const d = x - y;
    auto m = minimize_on_affine(*field_, *region_, 0.5 * (x + y), orthogonal_complement(d), opts_.bisector_min_tol,
                                AffineSearch::local, d.norm());
    if (m.on_boundary) {
      throw BoundaryHit("bisector_minimum: minimizer on the region boundary", m.point);
    }
    return {std::move(m.point), m.value};
  }

  Point advance(const Point& from, const Point& to, double cap) const {
    return advance_along_segment(*field_, from, to, cap, opts_.segment_search_samples);
  }

  SegmentMax segment_max(const Point& x, const Point& y) const {
    return mpass::segment_max(*field_, x, y, opts_.segment_search_samples);
  }

 private:
  const ScalarField* field_;
  const Region* region_;
  LocalOptions opts_;
};

inline double gap_ratio(double m, double fx) { return fx != 0 ? (m - fx) / std::abs(fx) : m - fx; }

/**
 * @brief Closest-pair refinement using the subsolver's segment contraction.
 */
template <LocalSubsolver S>
ClosestPair refine_closest_pair(const S& s, const Point& x, const Point& y, double level,
                                const ClosestPairOptions& opts = {}) {
  return refine_closest_pair(
      s.field(), s.region(), x, y, level, [&s](const Point& a, const Point& b, double cap) { return s.advance(a, b, cap); },
      opts);
}

/**
 * @brief Run the fast local iteration from (x0, y0).
 *
 * The endpoints are first equalized. Record i holds the pair (x_i, y_i), the bisector minimizer z_i and the bounds
 * f(x_i) <= f(z_i) <= M_i. The closest-pair refinement runs before every step when requested, and otherwise once
 * whenever |x_i - y_i| shrinks by less than 1% over three iterations or the bisector minimum falls below the pair.
 */
template <LocalSubsolver S>
LocalResult run_local(const S& s, const Point& x0, const Point& y0, const LocalOptions& opts = {}) {
  opts.validate();
  const ScalarField& f = s.field();
  LocalResult out;
  auto [x, y] = s.equalize(x0, y0);
  int last_refine = -10;
  bool force_refine = false;

  for (int i = 0; i <= opts.max_iter; ++i) {
    LocalIterate rec;
    rec.index = i;
    double dist = (x - y).norm();
    bool const stalled = i >= 3 && dist > 0.99 * out.records[i - 3].dist && i - last_refine >= 3;
    if (dist > opts.point_tol && (opts.do_step_1a || stalled || force_refine)) {
      double const level = std::max(f(x), f(y));
      ClosestPairOptions cp;
      cp.point_tol = opts.point_tol;
      auto pair = refine_closest_pair(s, x, y, level, cp);
      if (!pair.connected) {
        x = std::move(pair.x);
        y = std::move(pair.y);
        rec.refined = true;
        last_refine = i;
        dist = (x - y).norm();
      }
    }
    rec.x = x;
    rec.y = y;
    rec.f_x = f(x);
    rec.f_y = f(y);
    rec.dist = dist;

    if (dist <= opts.point_tol) {
      rec.z = x;
      rec.f_z = rec.f_x;
      rec.M = std::max(rec.f_x, rec.f_y);
      rec.argmax = rec.f_x >= rec.f_y ? x : y;
      rec.gap_ratio = gap_ratio(rec.M, rec.f_x);
      out.records.push_back(std::move(rec));
      out.status = LocalStatus::converged;
      return out;
    }

    auto mx = s.segment_max(x, y);
    rec.M = mx.value;
    rec.argmax = std::move(mx.argmax);
    rec.gap_ratio = gap_ratio(rec.M, rec.f_x);
    bool const gap_closed = rec.M - rec.f_x <= opts.gap_tol * std::max(1.0, std::abs(rec.f_x));
    // Within tolerance the bisector search may fail at roundoff scale; the segment maximizer is the estimate.
    auto finish_at_argmax = [&] {
      rec.z = rec.argmax;
      rec.f_z = rec.M;
      out.records.push_back(std::move(rec));
      out.status = LocalStatus::converged;
      return out;
    };

    try {
      auto zmin = s.bisector_minimum(x, y);
      rec.z = std::move(zmin.z);
      rec.f_z = zmin.value;
    } catch (const BoundaryHit& hit) {
      if (gap_closed) {
        return finish_at_argmax();
      }
      rec.z = hit.point();
      rec.f_z = f(hit.point());
      out.records.push_back(std::move(rec));
      out.status = LocalStatus::boundary_hit;
      out.boundary_point = hit.point();
      return out;
    }

    double const floor = std::min(rec.f_x, rec.f_y);
    if (rec.f_z < floor - level_slack(floor)) {
      if (gap_closed) {
        return finish_at_argmax();
      }
      if (!rec.refined && !force_refine) {
        // The bisector does not separate the components; move to a closest pair and redo the iteration.
        force_refine = true;
        --i;
        continue;
      }
      throw PreconditionViolation("run_local: bisector minimum lies below the pair; the points are not separated");
    }
    if (gap_closed) {
      out.records.push_back(std::move(rec));
      out.status = LocalStatus::converged;
      return out;
    }
    if (i == opts.max_iter) {
      out.records.push_back(std::move(rec));
      break;
    }

    force_refine = false;
    Point xn = s.advance(x, rec.z, rec.f_z);
    Point yn = s.advance(y, rec.z, rec.f_z);
    rec.x_reached_z = xn == rec.z;
    rec.y_reached_z = yn == rec.z;
    rec.x_next = xn;
    rec.y_next = yn;
    out.records.push_back(std::move(rec));
    x = std::move(xn);
    y = std::move(yn);
  }
  out.status = LocalStatus::max_iterations;
  return out;
}

/// Generic-field convenience overload.
inline LocalResult run_local(const ScalarField& f, const Region& region, const Point& x0, const Point& y0,
                             const LocalOptions& opts = {}) {
  FieldSubsolver s(f, region, opts);
  return run_local(s, x0, y0, opts);
}

/**
 * @brief Path x_0, x_1, ..., x_k, y_k, ..., y_1, y_0 through the local iterates, with max f along it.
 */
template <LocalSubsolver S>
Polyline assemble_local_path(const S& s, const std::vector<LocalIterate>& records) {
  if (records.empty()) {
    throw InvalidArgument("assemble_local_path: no records");
  }
  std::vector<Point> xs;
  std::vector<Point> ys;
  for (const auto& r : records) {
    xs.push_back(r.x);
    ys.push_back(r.y);
  }
  if (records.back().x_next) {
    xs.push_back(*records.back().x_next);
    ys.push_back(*records.back().y_next);
  }
  return assemble_pair_path(xs, ys, [&s](const Point& p, const Point& q) { return s.segment_max(p, q).value; });
}

inline Polyline assemble_local_path(const ScalarField& f, const std::vector<LocalIterate>& records) {
  Region const dummy = Region::ball(Point::Zero(f.dimension()), 1.0);
  FieldSubsolver s(f, dummy);
  return assemble_local_path(s, records);
}

}  // namespace mpass
