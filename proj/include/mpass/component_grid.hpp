#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <vector>

#include "mpass/errors.hpp"
#include "mpass/field.hpp"
#include "mpass/segment.hpp"

/**
 * \file component_grid.hpp
 *
 * @brief Planar flood fill of sublevel sets on a composite grid: a uniform base grid over the region's bounding box
 * plus nested windows, each refining its parent cells by 4 in both directions.
 */

namespace mpass::detail {

struct GridCell {
  int level;
  std::int64_t i;
  std::int64_t j;
};

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

class CompositeGrid {
 public:
  static constexpr int ratio = 4;

  /// Base grid of square cells of side about `h0` covering the bounding box of `region` (n = 2).
  CompositeGrid(const ScalarField& f, const Region& region, double h0) : f_(&f), region_(&region) {
    if (region.dimension() != 2 || f.dimension() != 2) {
      throw UnsupportedDimension("component grid: only planar fields are supported");
    }
    if (!(h0 > 0)) {
      throw InvalidArgument("component grid: spacing must be positive");
    }
    auto [lo, hi] = region.bounding_box();
    Point const width = hi - lo;
    nx_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(width[0] / h0 - 1e-9)));
    ny_ = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(width[1] / h0 - 1e-9)));
    origin_ = 0.5 * (lo + hi) - 0.5 * h0 * Point(Eigen::Vector2d(static_cast<double>(nx_), static_cast<double>(ny_)));
    Level base;
    base.h = h0;
    base.i0 = 0;
    base.i1 = nx_;
    base.j0 = 0;
    base.j1 = ny_;
    fill_values(base);
    levels_.push_back(std::move(base));
  }

  double base_spacing() const { return levels_.front().h; }
  double finest_spacing() const { return levels_.back().h; }
  int level_count() const { return static_cast<int>(levels_.size()); }
  double spacing(int level) const { return levels_[level].h; }

  /// Drop all refinement windows (base values are kept).
  void clear_windows() { levels_.resize(1); }

  /**
   * @brief Replace the refinement windows by a nested chain around the bounding box of p and q whose finest
   * spacing is at most `target_h`.
   */
  void refine_around(const Point& p, const Point& q, double target_h) {
    clear_windows();
    while (levels_.back().h > target_h) {
      const Level& parent = levels_.back();
      int const pl = level_count() - 1;
      auto idx = [&](double v, int axis) {
        return static_cast<std::int64_t>(std::floor((v - origin_[axis]) / parent.h));
      };
      std::int64_t a0 = std::min(idx(p[0], 0), idx(q[0], 0)) - 2;
      std::int64_t a1 = std::max(idx(p[0], 0), idx(q[0], 0)) + 3;
      std::int64_t b0 = std::min(idx(p[1], 1), idx(q[1], 1)) - 2;
      std::int64_t b1 = std::max(idx(p[1], 1), idx(q[1], 1)) + 3;
      // Keep one parent cell of margin except along the global grid boundary.
      std::int64_t const gx = extent(nx_, pl);
      std::int64_t const gy = extent(ny_, pl);
      a0 = std::max(a0, parent.i0 == 0 ? std::int64_t{0} : parent.i0 + 1);
      a1 = std::min(a1, parent.i1 == gx ? gx : parent.i1 - 1);
      b0 = std::max(b0, parent.j0 == 0 ? std::int64_t{0} : parent.j0 + 1);
      b1 = std::min(b1, parent.j1 == gy ? gy : parent.j1 - 1);
      if (a0 >= a1 || b0 >= b1) {
        break;
      }
      Level child;
      child.h = parent.h / ratio;
      child.i0 = a0 * ratio;
      child.i1 = a1 * ratio;
      child.j0 = b0 * ratio;
      child.j1 = b1 * ratio;
      fill_values(child);
      levels_.push_back(std::move(child));
    }
  }

  Point center(const GridCell& c) const {
    double const h = levels_[c.level].h;
    return origin_ + h * Point(Eigen::Vector2d(static_cast<double>(c.i) + 0.5, static_cast<double>(c.j) + 0.5));
  }

  bool inside(int level, std::int64_t i, std::int64_t j) const {
    const Level& l = levels_[level];
    return i >= l.i0 && i < l.i1 && j >= l.j0 && j < l.j1;
  }

  bool covered(int level, std::int64_t i, std::int64_t j) const {
    if (level + 1 >= level_count()) {
      return false;
    }
    const Level& c = levels_[level + 1];
    return i * ratio >= c.i0 && i * ratio < c.i1 && j * ratio >= c.j0 && j * ratio < c.j1;
  }

  bool active(int level, std::int64_t i, std::int64_t j) const { return inside(level, i, j) && !covered(level, i, j); }

  /// f at the cell center, +inf when the center lies outside the region.
  double value(const GridCell& c) const { return levels_[c.level].values[offset(c)]; }

  /// Active cell of the finest level containing p, if p lies in the grid.
  std::optional<GridCell> locate(const Point& p) const {
    for (int l = level_count() - 1; l >= 0; --l) {
      double const h = levels_[l].h;
      auto const i = static_cast<std::int64_t>(std::floor((p[0] - origin_[0]) / h));
      auto const j = static_cast<std::int64_t>(std::floor((p[1] - origin_[1]) / h));
      if (active(l, i, j)) {
        return GridCell{l, i, j};
      }
    }
    return std::nullopt;
  }

  /// Neighbours of an active cell across its four edges, possibly on the coarser or finer level.
  void neighbours(const GridCell& c, std::vector<GridCell>& out) const {
    out.clear();
    static constexpr std::array<std::array<int, 2>, 4> dirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    for (auto const& d : dirs) {
      std::int64_t const ni = c.i + d[0];
      std::int64_t const nj = c.j + d[1];
      if (!inside(c.level, ni, nj)) {
        if (c.level == 0) {
          continue;
        }
        GridCell const p{c.level - 1, floor_div(ni, ratio), floor_div(nj, ratio)};
        if (active(p.level, p.i, p.j)) {
          out.push_back(p);
        }
      } else if (covered(c.level, ni, nj)) {
        for (int k = 0; k < ratio; ++k) {
          std::int64_t ci = ni * ratio + k;
          std::int64_t cj = nj * ratio + k;
          if (d[0] == 1) {
            ci = ni * ratio;
          } else if (d[0] == -1) {
            ci = ni * ratio + ratio - 1;
          }
          if (d[1] == 1) {
            cj = nj * ratio;
          } else if (d[1] == -1) {
            cj = nj * ratio + ratio - 1;
          }
          if (active(c.level + 1, ci, cj)) {
            out.push_back(GridCell{c.level + 1, ci, cj});
          }
        }
      } else {
        out.push_back(GridCell{c.level, ni, nj});
      }
    }
  }

  /// Per-cell integer labels, reset to 0.
  void reset_labels() {
    for (auto& l : levels_) {
      l.labels.assign(l.values.size(), 0);
    }
  }
  int label(const GridCell& c) const { return levels_[c.level].labels[offset(c)]; }
  void set_label(const GridCell& c, int v) { levels_[c.level].labels[offset(c)] = v; }

  /**
   * @brief Label the 4-connected component of {f(center) <= level} containing `seed`; returns its cells.
   *
   * Two neighbouring cells are joined only when f <= level also holds midway between their centers, so thin
   * barriers between cells are not jumped.
   */
  std::vector<GridCell> flood(const GridCell& seed, double level, int tag) {
    std::vector<GridCell> cells;
    if (value(seed) > level || label(seed) != 0) {
      return cells;
    }
    std::deque<GridCell> queue{seed};
    set_label(seed, tag);
    std::vector<GridCell> nb;
    while (!queue.empty()) {
      GridCell const c = queue.front();
      queue.pop_front();
      cells.push_back(c);
      neighbours(c, nb);
      for (auto const& n : nb) {
        if (label(n) == 0 && value(n) <= level && (*f_)(0.5 * (center(c) + center(n))) <= level) {
          set_label(n, tag);
          queue.push_back(n);
        }
      }
    }
    return cells;
  }

  /**
   * @brief Member cell near p joined to p by a segment inside the sublevel set (checked at 8 points).
   *
   * Candidates are the active cells within two cells of p on p's level; the nearest valid one wins.
   */
  std::optional<GridCell> seed(const Point& p, double level) const {
    auto home = locate(p);
    if (!home) {
      return std::nullopt;
    }
    double const slack = level_slack(level);
    std::optional<GridCell> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::int64_t di = -2; di <= 2; ++di) {
      for (std::int64_t dj = -2; dj <= 2; ++dj) {
        GridCell const c{home->level, home->i + di, home->j + dj};
        if (!active(c.level, c.i, c.j) || value(c) > level) {
          continue;
        }
        Point const q = center(c);
        double const d = (q - p).norm();
        if (d >= best_d) {
          continue;
        }
        bool ok = true;
        for (int k = 1; k < 8 && ok; ++k) {
          ok = (*f_)(lerp(p, q, k / 8.0)) <= level + slack;
        }
        if (ok) {
          best = c;
          best_d = d;
        }
      }
    }
    return best;
  }

  /// Cells of `cells` having a neighbour with a different label.
  std::vector<GridCell> boundary(const std::vector<GridCell>& cells) const {
    std::vector<GridCell> out;
    std::vector<GridCell> nb;
    for (auto const& c : cells) {
      neighbours(c, nb);
      int const own = label(c);
      if (nb.size() < 4 || std::any_of(nb.begin(), nb.end(), [&](const GridCell& n) { return label(n) != own; })) {
        out.push_back(c);
      }
    }
    return out;
  }

 private:
  struct Level {
    double h = 0;
    std::int64_t i0 = 0, i1 = 0, j0 = 0, j1 = 0;
    std::vector<double> values;
    std::vector<int> labels;
  };

  static std::int64_t extent(std::int64_t n, int level) {
    std::int64_t e = n;
    for (int l = 0; l < level; ++l) {
      e *= ratio;
    }
    return e;
  }

  std::size_t offset(const GridCell& c) const {
    const Level& l = levels_[c.level];
    return static_cast<std::size_t>((c.i - l.i0) * (l.j1 - l.j0) + (c.j - l.j0));
  }

  void fill_values(Level& l) const {
    auto const rows = static_cast<std::size_t>(l.i1 - l.i0);
    auto const cols = static_cast<std::size_t>(l.j1 - l.j0);
    l.values.resize(rows * cols);
    l.labels.assign(rows * cols, 0);
    for (std::int64_t i = l.i0; i < l.i1; ++i) {
      for (std::int64_t j = l.j0; j < l.j1; ++j) {
        Point const c =
            origin_ + l.h * Point(Eigen::Vector2d(static_cast<double>(i) + 0.5, static_cast<double>(j) + 0.5));
        l.values[static_cast<std::size_t>((i - l.i0) * (l.j1 - l.j0) + (j - l.j0))] =
            region_->contains(c) ? (*f_)(c) : std::numeric_limits<double>::infinity();
      }
    }
  }

  const ScalarField* f_;
  const Region* region_;
  std::int64_t nx_ = 0;
  std::int64_t ny_ = 0;
  Point origin_;
  std::vector<Level> levels_;
};

/// Closest pair of cell centers between two cell sets (sweep over x with pruning).
struct CellPair {
  GridCell a;
  GridCell b;
  double dist;
};

inline CellPair closest_cells(const CompositeGrid& grid, const std::vector<GridCell>& as,
                              const std::vector<GridCell>& bs) {
  struct Entry {
    Point p;
    std::size_t k;
  };
  std::vector<Entry> eb;
  eb.reserve(bs.size());
  for (std::size_t k = 0; k < bs.size(); ++k) {
    eb.push_back({grid.center(bs[k]), k});
  }
  std::sort(eb.begin(), eb.end(), [](const Entry& u, const Entry& v) {
    return u.p[0] < v.p[0] || (u.p[0] == v.p[0] && (u.p[1] < v.p[1] || (u.p[1] == v.p[1] && u.k < v.k)));
  });
  CellPair best{as.front(), bs.front(), std::numeric_limits<double>::infinity()};
  for (auto const& a : as) {
    Point const pa = grid.center(a);
    auto it = std::lower_bound(eb.begin(), eb.end(), pa[0] - best.dist,
                               [](const Entry& e, double x) { return e.p[0] < x; });
    for (; it != eb.end() && it->p[0] <= pa[0] + best.dist; ++it) {
      double const d = (it->p - pa).norm();
      if (d < best.dist) {
        best = {a, bs[it->k], d};
      }
    }
  }
  return best;
}

}  // namespace mpass::detail
