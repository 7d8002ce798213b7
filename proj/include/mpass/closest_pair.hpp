#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <utility>

#include "mpass/derivatives.hpp"
#include "mpass/errors.hpp"
#include "mpass/field.hpp"
#include "mpass/hyperplane.hpp"
#include "mpass/segment.hpp"

/**
 * \file closest_pair.hpp
 *
 * @brief Local refinement of a pair of points towards the closest pair between two components of a sublevel set.
 */

namespace mpass {

struct ClosestPairOptions {
  double point_tol = 1e-10;
  int max_sweeps = 50;
  double hyperplane_tol = 1e-12;
};

struct ClosestPair {
  Point x;
  Point y;
  int sweeps = 0;
  /// The segment between the hyperplane minimizers stayed inside the sublevel set: the points share a component.
  bool connected = false;
  /// A point ended on the region boundary, where the pair is held by the constraint rather than the level set.
  bool on_boundary = false;
};

/// advance(from, to, cap): furthest point of [from, to] keeping f <= cap.
using AdvanceFn = std::function<Point(const Point&, const Point&, double)>;

/**
 * @brief Nearest point to q on {f = level}, by Newton's method on the Lagrange system started from p0.
 *
 * Solves p - q + mu grad f(p) = 0, f(p) = level. Returns p0 unchanged when the iteration fails to produce a
 * point of the region that is nearer to q with mu >= 0.
 */
inline Point project_onto_level(const ScalarField& f, const Region& region, const Point& q, const Point& p0,
                                double level) {
  Eigen::Index const n = p0.size();
  Point p = p0;
  Point g = f.gradient_or_fd(p);
  double const gg = g.squaredNorm();
  if (!(gg > 0)) {
    return p0;
  }
  double mu = std::max(0.0, (q - p).dot(g) / gg);
  auto residual = [&](const Point& pt, double m, const Point& grad) {
    Eigen::VectorXd r(n + 1);
    r.head(n) = pt - q + m * grad;
    r[n] = f(pt) - level;
    return r;
  };
  Eigen::VectorXd r = residual(p, mu, g);
  for (int it = 0; it < 40; ++it) {
    double const rn = r.norm();
    if (rn <= 1e-15 * (1.0 + q.norm())) {
      break;
    }
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n + 1, n + 1);
    jac.topLeftCorner(n, n) = Eigen::MatrixXd::Identity(n, n) + mu * gradient_fd_hessian(f, p);
    jac.block(0, n, n, 1) = g;
    jac.block(n, 0, 1, n) = g.transpose();
    Eigen::VectorXd const delta = jac.colPivHouseholderQr().solve(-r);
    double alpha = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls) {
      Point const pt = p + alpha * delta.head(n);
      double const m = mu + alpha * delta[n];
      Point const gt = f.gradient_or_fd(pt);
      Eigen::VectorXd const rt = residual(pt, m, gt);
      if (rt.norm() < rn) {
        p = pt;
        mu = m;
        g = gt;
        r = rt;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved || delta.head(n).norm() <= 1e-16 * (1.0 + p.norm())) {
      break;
    }
  }
  bool const ok = mu >= 0 && region.contains(p) && std::abs(f(p) - level) <= level_slack(level) * 10 &&
                  (p - q).norm() <= (p0 - q).norm() + 1e-12;
  return ok ? p : p0;
}

/**
 * @brief Move (x, y) towards a locally closest pair between their components of lev<=level f within the region.
 *
 * Each sweep minimizes f on the hyperplanes through x and y orthogonal to x - y, contracts the segment between the
 * two minimizers to the boundaries of their components, and then corrects both points by alternating nearest-point
 * projections onto the level set. A sweep is kept only when it does not increase |x - y|.
 */
inline ClosestPair refine_closest_pair(const ScalarField& f, const Region& region, const Point& x0, const Point& y0,
                                       double level, const AdvanceFn& advance, const ClosestPairOptions& opts = {}) {
  double const slack = level_slack(level);
  if (f(x0) > level + slack || f(y0) > level + slack) {
    throw PreconditionViolation("refine_closest_pair: a point lies above the level");
  }
  ClosestPair out{x0, y0, 0, false};
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    Point const d = out.x - out.y;
    double const dist = d.norm();
    if (!(dist > 0)) {
      break;
    }
    out.sweeps = sweep + 1;
    auto const basis = orthogonal_complement(d);
    Point xs = minimize_on_affine(f, region, out.x, basis, opts.hyperplane_tol, AffineSearch::local, dist).point;
    Point ys = minimize_on_affine(f, region, out.y, basis, opts.hyperplane_tol, AffineSearch::local, dist).point;
    if (f(xs) > level + slack) {
      xs = out.x;
    }
    if (f(ys) > level + slack) {
      ys = out.y;
    }
    Point x1 = advance(xs, ys, level);
    if (x1 == ys) {
      out.connected = true;
      break;
    }
    Point y1 = advance(ys, xs, level);
    if ((x1 - y1).norm() > dist + 1e-12) {
      x1 = out.x;
      y1 = out.y;
    }
    Point y2 = project_onto_level(f, region, x1, y1, level);
    Point x2 = project_onto_level(f, region, y2, x1, level);
    if ((x2 - y2).norm() > (x1 - y1).norm() + 1e-15) {
      x2 = x1;
      y2 = y1;
    }
    double const move = (x2 - out.x).norm() + (y2 - out.y).norm();
    out.x = std::move(x2);
    out.y = std::move(y2);
    if (move < opts.point_tol) {
      break;
    }
  }
  out.on_boundary = !region.interior(out.x) || !region.interior(out.y);
  return out;
}

/// Generic overload: segment contraction by sampling along the segment.
inline ClosestPair refine_closest_pair(const ScalarField& f, const Region& region, const Point& x0, const Point& y0,
                                       double level, const ClosestPairOptions& opts = {}) {
  return refine_closest_pair(
      f, region, x0, y0, level,
      [&f](const Point& a, const Point& b, double cap) { return advance_along_segment(f, a, b, cap); }, opts);
}

}  // namespace mpass
