#pragma once

#include <boost/math/tools/minima.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "mpass/errors.hpp"
#include "mpass/field.hpp"

/**
 * \file hyperplane.hpp
 *
 * @brief Minimization of a field restricted to an affine subspace intersected with the search region.
 */

namespace mpass {

/// A minimizer was pushed onto the boundary of the search region.
class BoundaryHit : public Error {
 public:
  BoundaryHit(const std::string& what, Point point) : Error(what), point_(std::move(point)) {}
  const Point& point() const { return point_; }

 private:
  Point point_;
};

/**
 * @brief Orthonormal basis (n x (n-1)) of the complement of `normal`.
 *
 * The columns are the first n-1 columns of the Householder reflection that swaps e_n and normal/|normal|, so the
 * construction is deterministic.
 */
inline Eigen::MatrixXd orthogonal_complement(const Point& normal) {
  Eigen::Index const n = normal.size();
  double const len = normal.norm();
  if (!(len > 0)) {
    throw InvalidArgument("orthogonal_complement: zero normal");
  }
  Point const d = normal / len;
  Point v = d;
  v[n - 1] -= 1.0;
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
  double const vv = v.squaredNorm();
  if (vv > 1e-30) {
    q -= (2.0 / vv) * v * v.transpose();
  }
  return q.leftCols(n - 1);
}

struct AffineMinimum {
  Point point;
  double value;
  /// Set when the minimizer sits on the region boundary with descent pointing outwards.
  bool on_boundary = false;
};

enum class AffineSearch {
  /// Global scan of the (one-dimensional) slice before refinement.
  global,
  /// Descent from the origin of the slice.
  local,
};

namespace detail {

  /// Directional derivative along b at p.
  inline double slope(const ScalarField& f, const Point& p, const Point& b) { return f.gradient_or_fd(p).dot(b); }

  /// Secant iteration on the slope to sharpen a Brent minimizer in [lo, hi].
  inline double polish_line_min(const ScalarField& f, const Point& origin, const Point& b, double t, double lo,
                                double hi, double tol) {
    auto at = [&](double s) -> Point { return origin + s * b; };
    double best_t = t;
    double const f_best = f(at(t));
    Point g = f.gradient_or_fd(at(t));
    double best_slope = std::abs(g.dot(b));
    if (best_slope <= tol * (1.0 + g.norm())) {
      return best_t;
    }
    double t_prev = t;
    double s_prev = g.dot(b);
    double t_cur = std::clamp(t - 1e-6 * std::max(hi - lo, 1e-12), lo, hi);
    if (t_cur == t_prev) {
      t_cur = std::clamp(t + 1e-6 * std::max(hi - lo, 1e-12), lo, hi);
    }
    for (int it = 0; it < 30; ++it) {
      g = f.gradient_or_fd(at(t_cur));
      double const s_cur = g.dot(b);
      double const fv = f(at(t_cur));
      if (std::abs(s_cur) < best_slope && fv <= f_best + 8 * std::numeric_limits<double>::epsilon() * (1 + std::abs(f_best))) {
        best_slope = std::abs(s_cur);
        best_t = t_cur;
      }
      if (std::abs(s_cur) <= tol * (1.0 + g.norm())) {
        break;
      }
      double const denom = s_cur - s_prev;
      if (denom == 0 || t_cur == t_prev) {
        break;
      }
      double const t_next = std::clamp(t_cur - s_cur * (t_cur - t_prev) / denom, lo, hi);
      t_prev = t_cur;
      s_prev = s_cur;
      t_cur = t_next;
      if (t_cur == t_prev) {
        break;
      }
    }
    return best_t;
  }

  inline AffineMinimum line_minimum(const ScalarField& f, const Region& region, const Point& origin, const Point& b,
                                    double tol, AffineSearch mode, double scale) {
    auto clip = region.clip_line(origin, b);
    if (!clip) {
      throw PreconditionViolation("line_minimum: line misses the region");
    }
    auto [c0, c1] = *clip;
    auto at = [&](double s) -> Point { return origin + s * b; };

    double w0 = c0;
    double w1 = c1;
    if (mode == AffineSearch::local) {
      double r = std::max(scale, 1e-12);
      w0 = std::max(c0, -r);
      w1 = std::min(c1, r);
    }
    constexpr int samples = 64;
    int best = 0;
    double best_v = 0;
    for (;;) {
      best_v = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= samples; ++k) {
        double const v = f(at(w0 + (w1 - w0) * k / samples));
        if (v < best_v) {
          best_v = v;
          best = k;
        }
      }
      // Local mode widens the window while the minimum sits on an artificial window edge.
      bool const edge_lo = best == 0 && w0 > c0;
      bool const edge_hi = best == samples && w1 < c1;
      if (mode == AffineSearch::global || (!edge_lo && !edge_hi)) {
        break;
      }
      double const r = 4 * std::max(-w0, w1);
      w0 = std::max(c0, -r);
      w1 = std::min(c1, r);
    }
    double const step = (w1 - w0) / samples;
    double const lo = w0 + std::max(best - 1, 0) * step;
    double const hi = w0 + std::min(best + 1, samples) * step;
    auto [t, v] = boost::math::tools::brent_find_minima([&](double s) { return f(at(s)); }, lo, hi,
                                                          std::numeric_limits<double>::digits);
    if (!(v <= best_v)) {
      t = w0 + best * step;
    }
    t = polish_line_min(f, origin, b, t, lo, hi, tol);
    Point p = at(t);
    double const fp = f(p);

    bool boundary = false;
    double const edge_tol = 1e-9 * std::max(c1 - c0, 1e-12);
    if (t - c0 <= edge_tol && slope(f, p, b) > 0) {
      boundary = true;
    }
    if (c1 - t <= edge_tol && slope(f, p, b) < 0) {
      boundary = true;
    }
    return {std::move(p), fp, boundary};
  }

  /// BFGS with Armijo backtracking on w -> f(origin + basis w), confined to the region.
  inline AffineMinimum bfgs_minimum(const ScalarField& f, const Region& region, const Point& origin,
                                    const Eigen::MatrixXd& basis, double tol) {
    Eigen::Index const k = basis.cols();
    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    Point p = origin;
    double fv = f(p);
    Point grad = f.gradient_or_fd(p);
    Eigen::VectorXd g = basis.transpose() * grad;
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(k, k);
    bool boundary = false;

    for (int it = 0; it < 500; ++it) {
      if (g.norm() <= tol * (1.0 + grad.norm())) {
        break;
      }
      Eigen::VectorXd dir = -hinv * g;
      if (dir.dot(g) >= 0) {
        hinv.setIdentity();
        dir = -g;
      }
      Point const step_dir = basis * dir;
      auto clip = region.clip_line(p, step_dir);
      double const s_max = clip ? std::max(clip->second, 0.0) : 0.0;
      double alpha = std::min(1.0, s_max);
      double const dg = dir.dot(g);
      Point trial;
      double f_trial = 0;
      bool accepted = false;
      for (int ls = 0; ls < 60 && alpha > 0; ++ls) {
        trial = p + alpha * step_dir;
        f_trial = f(trial);
        if (f_trial <= fv + 1e-4 * alpha * dg) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        // Descent stalls: either the boundary blocks it or round-off dominates.
        boundary = s_max <= 1e-12 * (1.0 + p.norm());
        break;
      }
      Eigen::VectorXd const s = alpha * dir;
      w += s;
      Point const grad_new = f.gradient_or_fd(trial);
      Eigen::VectorXd const g_new = basis.transpose() * grad_new;
      Eigen::VectorXd const yv = g_new - g;
      double const sy = s.dot(yv);
      if (sy > 1e-300) {
        double const rho = 1.0 / sy;
        Eigen::MatrixXd const ident = Eigen::MatrixXd::Identity(k, k);
        hinv = (ident - rho * s * yv.transpose()) * hinv * (ident - rho * yv * s.transpose()) + rho * s * s.transpose();
      }
      bool const at_edge = alpha == s_max && s_max < 1.0;
      p = trial;
      fv = f_trial;
      grad = grad_new;
      g = g_new;
      if (at_edge) {
        boundary = true;
        break;
      }
    }
    return {p, fv, boundary};
  }

}  // namespace detail

/**
 * @brief Minimize f over {origin + basis w} intersected with the region.
 *
 * One-dimensional slices use a 64-point scan, Brent refinement and a secant polish on the slope; higher dimensional
 * slices run BFGS from the origin. `scale` sets the initial window of a local one-dimensional search.
 */
inline AffineMinimum minimize_on_affine(const ScalarField& f, const Region& region, const Point& origin,
                                        const Eigen::MatrixXd& basis, double tol, AffineSearch mode, double scale) {
  if (basis.cols() == 1) {
    return detail::line_minimum(f, region, origin, basis.col(0), tol, mode, scale);
  }
  return detail::bfgs_minimum(f, region, origin, basis, tol);
}

struct BisectorMinimum {
  Point z;
  double f_z;
};

/**
 * @brief Minimizer of f on the hyperplane orthogonal to x - y through (x + y)/2, within the region.
 *
 * Throws BoundaryHit when the minimizer is pushed onto the region boundary.
 */
inline BisectorMinimum bisector_minimize(const ScalarField& f, const Region& region, const Point& x, const Point& y,
                                         double tol = 1e-12) {
  Point const d = x - y;
  if (!(d.norm() > 0)) {
    throw InvalidArgument("bisector_minimize: x and y coincide");
  }
  Point const mid = 0.5 * (x + y);
  if (!region.contains(mid)) {
    throw PreconditionViolation("bisector_minimize: midpoint outside the region");
  }
  auto const basis = orthogonal_complement(d);
  auto m = minimize_on_affine(f, region, mid, basis, tol, AffineSearch::global, d.norm());
  if (m.on_boundary) {
    throw BoundaryHit("bisector_minimize: minimizer on the region boundary", m.point);
  }
  return {std::move(m.point), m.value};
}

}  // namespace mpass
