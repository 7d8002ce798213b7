#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "mpass/field.hpp"
#include "mpass/segment.hpp"

namespace mpass {

/// A piecewise linear path with a certificate: the maximum of f along it.
struct Polyline {
  std::vector<Point> vertices;
  double max_value = -std::numeric_limits<double>::infinity();
};

/**
 * @brief The path x_0, ..., x_k, y_k, ..., y_0 through the iterate pairs, with consecutive duplicates dropped.
 *
 * `edge_max(p, q)` returns max f on [p, q].
 */
template <class EdgeMax>
Polyline assemble_pair_path(const std::vector<Point>& xs, const std::vector<Point>& ys, EdgeMax&& edge_max) {
  Polyline path;
  auto push = [&](const Point& p) {
    if (path.vertices.empty() || path.vertices.back() != p) {
      path.vertices.push_back(p);
    }
  };
  for (const auto& p : xs) {
    push(p);
  }
  for (auto it = ys.rbegin(); it != ys.rend(); ++it) {
    push(*it);
  }
  if (path.vertices.size() == 1) {
    path.vertices.push_back(path.vertices.front());
  }
  for (std::size_t k = 0; k + 1 < path.vertices.size(); ++k) {
    path.max_value = std::max(path.max_value, edge_max(path.vertices[k], path.vertices[k + 1]));
  }
  return path;
}

}  // namespace mpass
