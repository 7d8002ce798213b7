#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "mpass/closest_pair.hpp"
#include "mpass/component_grid.hpp"
#include "mpass/errors.hpp"
#include "mpass/field.hpp"
#include "mpass/path.hpp"
#include "mpass/problems.hpp"
#include "mpass/segment.hpp"

/**
 * \file bisection.hpp
 *
 * @brief Level set bisection for mountain passes in the plane.
 *
 * The mountain pass value between a and b is bracketed by [l, u]. At the midpoint level m the components of
 * lev<=m f containing the current pair are compared: if they coincide, m is an upper bound; otherwise m is a lower
 * bound and the pair is replaced by the closest points of the two components.
 */

namespace mpass {

struct ComponentQuery {
  const ScalarField& field;
  const Region& region;
  double level;
  /// Grid spacing of the flood fill.
  double resolution;
};

struct ComponentPair {
  Point x;
  Point y;
  double dist;
};

/// Both points lie in the same component.
struct Connected {};

using ComponentDistance = std::variant<ComponentPair, Connected>;

struct BisectionStep {
  double lower;
  double upper;
  Point x;
  Point y;
  /// The level was a lower bound and the pair moved.
  bool lower_raised;
  /// Finest grid spacing used for the component test.
  double spacing;
};

struct BisectionState {
  double lower = 0;
  double upper = 0;
  Point x;
  Point y;
  /// Level at which the current pair was produced.
  double level_of_pair = 0;
  /// The endpoints x_0 = a, y_0 = b.
  Point a;
  Point b;
  /// min over lower steps of max(l_i, max of f on [x_i, y_i]): an upper bound certified by a path.
  double path_upper = 0;
  std::vector<BisectionStep> history;

  double width() const { return upper - lower; }
  double pair_distance() const { return (x - y).norm(); }
};

/// Resolution exhausted during bisection; carries the last consistent state.
class BisectionResolutionLimit : public ResolutionLimit {
 public:
  BisectionResolutionLimit(const std::string& what, BisectionState state)
      : ResolutionLimit(what), state_(std::move(state)) {}
  const BisectionState& state() const { return state_; }

 private:
  BisectionState state_;
};

struct BisectionOptions {
  double value_tol = 1e-8;
  double point_tol = 1e-9;
  int max_iter = 200;
  /// Base grid spacing is diameter(region) / grid_cells.
  int grid_cells = 512;
  /// Also lower u to the path bound max(l_i, max f on [x_i, y_i]) when smaller. Off by default so that u - l
  /// halves exactly; the path bound is always reported in path_upper.
  bool tighten_upper = false;
  ClosestPairOptions polish{};
};

namespace detail {

  struct Separation {
    bool connected = false;
    Point x;
    Point y;
    double dist = 0;
  };

  enum class AtFloor { accept, fail };

  /**
   * @brief Flood-fill test of whether a and b share a component of lev<=level f.
   *
   * When the closest cells of two distinct components are within 4 cells, the grid is refined around them until
   * the components are resolved or the spacing reaches `h_min`.
   */
  inline Separation separate(CompositeGrid& grid, const Point& a, const Point& b, double level, bool adaptive,
                             double h_min, AtFloor at_floor) {
    for (int round = 0; round < 64; ++round) {
      grid.reset_labels();
      auto sa = grid.seed(a, level);
      auto sb = grid.seed(b, level);
      if (!sa || !sb) {
        throw ResolutionLimit("component test: no grid cell connects to an endpoint");
      }
      auto comp_a = grid.flood(*sa, level, 1);
      if (grid.label(*sb) == 1) {
        return {true, a, b, 0};
      }
      auto comp_b = grid.flood(*sb, level, 2);
      auto const pair = closest_cells(grid, grid.boundary(comp_a), grid.boundary(comp_b));
      double const hl = std::max(grid.spacing(pair.a.level), grid.spacing(pair.b.level));
      Separation sep{false, grid.center(pair.a), grid.center(pair.b), pair.dist};
      if (!adaptive || pair.dist >= 4 * hl) {
        return sep;
      }
      if (hl / CompositeGrid::ratio < h_min) {
        if (at_floor == AtFloor::accept) {
          return sep;
        }
        throw ResolutionLimit("component test: components indistinguishable at the finest spacing");
      }
      grid.refine_around(sep.x, sep.y, std::max(std::min(pair.dist / 32, hl / CompositeGrid::ratio), h_min));
    }
    throw ResolutionLimit("component test: refinement did not settle");
  }

  /// Closest-pair polish of a separated cell pair; falls back to the cell centers if the polish fails.
  inline ComponentPair polish_pair(const ScalarField& f, const Region& region, const Separation& sep, double level,
                                   double cell_slack, const ClosestPairOptions& opts) {
    ComponentPair out{sep.x, sep.y, sep.dist};
    try {
      auto cp = refine_closest_pair(f, region, sep.x, sep.y, level, opts);
      double const slack = level_slack(level);
      double const d = (cp.x - cp.y).norm();
      if (!cp.connected && f(cp.x) <= level + slack && f(cp.y) <= level + slack && region.contains(cp.x) &&
          region.contains(cp.y) && d <= sep.dist + cell_slack && d > 0) {
        out = {std::move(cp.x), std::move(cp.y), d};
      }
    } catch (const Error&) {
    }
    return out;
  }

  inline void check_query(const ComponentQuery& q, const Point& a, const Point& b) {
    if (q.field.dimension() != 2 || q.region.dimension() != 2) {
      throw UnsupportedDimension("component query: only planar fields are supported");
    }
    if (a.size() != 2 || b.size() != 2) {
      throw InvalidArgument("component query: endpoints must be planar");
    }
    if (!(q.resolution > 0)) {
      throw InvalidArgument("component query: resolution must be positive");
    }
    double const slack = level_slack(q.level);
    if (q.field(a) > q.level + slack || q.field(b) > q.level + slack) {
      throw PreconditionViolation("component query: an endpoint lies above the level");
    }
    if (!q.region.contains(a) || !q.region.contains(b)) {
      throw PreconditionViolation("component query: an endpoint lies outside the region");
    }
  }

}  // namespace detail

/**
 * @brief Whether a and b are joined through grid cells (spacing q.resolution) whose centers lie in the region
 * with f <= level.
 */
inline bool same_component(const ComponentQuery& q, const Point& a, const Point& b) {
  detail::check_query(q, a, b);
  detail::CompositeGrid grid(q.field, q.region, q.resolution);
  return detail::separate(grid, a, b, q.level, false, q.resolution, detail::AtFloor::accept).connected;
}

/**
 * @brief Closest pair between the components of a and b, or Connected.
 *
 * The grid starts at max(resolution, diameter/512) and is refined near the closest cells down to `resolution`;
 * the closest cells are then polished towards a locally closest pair of points on the level set.
 */
inline ComponentDistance component_distance(const ComponentQuery& q, const Point& a, const Point& b,
                                            const ClosestPairOptions& opts = {}) {
  detail::check_query(q, a, b);
  double const h0 = std::max(q.resolution, q.region.diameter() / 512);
  detail::CompositeGrid grid(q.field, q.region, h0);
  auto sep = detail::separate(grid, a, b, q.level, true, q.resolution, detail::AtFloor::accept);
  if (sep.connected) {
    return Connected{};
  }
  return detail::polish_pair(q.field, q.region, sep, q.level, 2 * grid.finest_spacing(), opts);
}

/**
 * @brief Bisection on the level between a and b, from the bracket [init_lower, init_upper].
 */
inline BisectionState bisect(const ScalarField& f, const Region& region, const Point& a, const Point& b,
                             double init_lower, double init_upper, const BisectionOptions& opts = {}) {
  if (f.dimension() != 2 || region.dimension() != 2) {
    throw UnsupportedDimension("bisect: only planar fields are supported");
  }
  if (!(init_lower <= init_upper) || !std::isfinite(init_lower) || !std::isfinite(init_upper)) {
    throw InvalidArgument("bisect: initial bounds are inverted");
  }
  if (!(opts.value_tol > 0) || !(opts.point_tol > 0) || opts.max_iter < 0 || opts.grid_cells < 2) {
    throw InvalidArgument("bisect: invalid options");
  }
  double const f_ab = std::max(f(a), f(b));
  if (init_lower < f_ab - level_slack(f_ab)) {
    throw PreconditionViolation("bisect: lower bound below an endpoint value");
  }
  if (!region.contains(a) || !region.contains(b)) {
    throw PreconditionViolation("bisect: endpoint outside the region");
  }

  BisectionState st;
  st.lower = init_lower;
  st.upper = init_upper;
  st.x = a;
  st.y = b;
  st.a = a;
  st.b = b;
  st.level_of_pair = init_lower;
  st.path_upper = segment_max(f, a, b).value;

  double const diam = region.diameter();
  double const h0 = diam / opts.grid_cells;
  double const h_min = 1e-12 * (1.0 + diam);
  detail::CompositeGrid grid(f, region, h0);

  for (int it = 0; it < opts.max_iter; ++it) {
    if (st.width() <= opts.value_tol || st.pair_distance() <= opts.point_tol) {
      break;
    }
    double const m = 0.5 * (st.lower + st.upper);
    double const target = st.pair_distance() / 32;
    if (target < h0) {
      grid.refine_around(st.x, st.y, std::max(target, h_min));
    } else {
      grid.clear_windows();
    }
    detail::Separation sep;
    try {
      sep = detail::separate(grid, st.x, st.y, m, true, h_min, detail::AtFloor::fail);
    } catch (const ResolutionLimit& e) {
      throw BisectionResolutionLimit(e.what(), st);
    }
    if (sep.connected) {
      st.upper = m;
      st.history.push_back({st.lower, st.upper, st.x, st.y, false, grid.finest_spacing()});
      continue;
    }
    auto pair = detail::polish_pair(f, region, sep, m, 2 * grid.finest_spacing(), opts.polish);
    st.lower = m;
    st.x = std::move(pair.x);
    st.y = std::move(pair.y);
    st.level_of_pair = m;
    double const bound = std::max(m, segment_max(f, st.x, st.y).value);
    st.path_upper = std::min(st.path_upper, bound);
    if (opts.tighten_upper && bound < st.upper) {
      st.upper = bound;
    }
    st.history.push_back({st.lower, st.upper, st.x, st.y, true, grid.finest_spacing()});
  }
  return st;
}

/**
 * @brief Bisection between the catalog endpoints; the bracket defaults to [max(f(a), f(b)), max of f on [a, b]].
 */
inline BisectionState bisect(const TestProblem& p, std::optional<double> init_lower = std::nullopt,
                             std::optional<double> init_upper = std::nullopt, const BisectionOptions& opts = {}) {
  double const lo = init_lower.value_or(std::max(p.field(p.a), p.field(p.b)));
  double const hi = init_upper.value_or(segment_max(p.field, p.a, p.b).value);
  return bisect(p.field, p.region, p.a, p.b, lo, hi, opts);
}

/**
 * @brief Polyline a = x_0, x_1, ..., x_i, y_i, ..., y_1, y_0 = b with the maximum of f along it.
 */
inline Polyline assemble_path(const BisectionState& st, const ScalarField& f) {
  std::vector<Point> xs{st.a};
  std::vector<Point> ys{st.b};
  for (const auto& h : st.history) {
    if (h.lower_raised) {
      xs.push_back(h.x);
      ys.push_back(h.y);
    }
  }
  return assemble_pair_path(xs, ys, [&f](const Point& p, const Point& q) { return segment_max(f, p, q).value; });
}

}  // namespace mpass
