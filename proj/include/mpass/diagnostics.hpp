#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "mpass/derivatives.hpp"
#include "mpass/errors.hpp"
#include "mpass/field.hpp"

namespace mpass {

/**
 * @brief First-order conditions for a closest pair (x, y) between two components of a sublevel set:
 * grad f(x) = k1 (y - x), grad f(y) = k2 (x - y) with k1, k2 >= 0, and f(x) = f(y) = level.
 */
struct OptimalityReport {
  double kappa1 = 0;
  double kappa2 = 0;
  double residual_x = 0;
  double residual_y = 0;
  std::pair<double, double> level_residuals{0, 0};
  double grad_norm_x = 0;
  double grad_norm_y = 0;
  /// False for fields without an analytic gradient; residuals then come from finite differences only.
  bool applicable = true;

  /// Largest gradient residual relative to 1 + |grad f|.
  double relative_residual() const {
    return std::max(residual_x / (1.0 + grad_norm_x), residual_y / (1.0 + grad_norm_y));
  }
};

inline OptimalityReport check_pair_optimality(const ScalarField& f, const Point& x, const Point& y, double level) {
  Point const d = y - x;
  double const dd = d.squaredNorm();
  if (!(dd > 0)) {
    throw InvalidArgument("check_pair_optimality: x and y coincide");
  }
  Point const gx = f.gradient_or_fd(x);
  Point const gy = f.gradient_or_fd(y);
  OptimalityReport r;
  r.kappa1 = std::max(0.0, gx.dot(d) / dd);
  r.kappa2 = std::max(0.0, -gy.dot(d) / dd);
  r.residual_x = (gx - r.kappa1 * d).norm();
  r.residual_y = (gy + r.kappa2 * d).norm();
  r.level_residuals = {std::abs(f(x) - level), std::abs(f(y) - level)};
  r.grad_norm_x = gx.norm();
  r.grad_norm_y = gy.norm();
  r.applicable = f.has_gradient();
  return r;
}

struct CriticalPointReport {
  double grad_norm = 0;
  /// Ascending.
  std::vector<double> hessian_eigenvalues;
  int morse_index = 0;
  bool nondegenerate = false;
};

/**
 * @brief Gradient norm, Hessian spectrum and Morse index at x.
 *
 * The Hessian comes from central second differences. Eigenvalues within `tol` of zero (default
 * 1e-6 max |eigenvalue|) count as degenerate and are excluded from the index.
 */
inline CriticalPointReport classify_critical_point(const ScalarField& f, const Point& x,
                                                   std::optional<double> tol = std::nullopt) {
  CriticalPointReport r;
  r.grad_norm = f.gradient_or_fd(x).norm();
  Eigen::MatrixXd const h = fd_hessian(f, x);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (h + h.transpose()), Eigen::EigenvaluesOnly);
  Eigen::VectorXd const ev = es.eigenvalues();
  r.hessian_eigenvalues.assign(ev.data(), ev.data() + ev.size());
  std::sort(r.hessian_eigenvalues.begin(), r.hessian_eigenvalues.end());
  double const scale = ev.cwiseAbs().maxCoeff();
  double const t = tol.value_or(1e-6 * scale);
  r.nondegenerate = scale > 0;
  for (double e : r.hessian_eigenvalues) {
    if (e < -t) {
      ++r.morse_index;
    }
    if (std::abs(e) <= t) {
      r.nondegenerate = false;
    }
  }
  return r;
}

/**
 * @brief Ratios |v_{i+1} - limit| / |v_i - limit|; nullopt marks 0/0 (both already at the limit).
 */
inline std::vector<std::optional<double>> convergence_rates(const std::vector<double>& values, double limit) {
  if (values.size() < 3) {
    throw InvalidArgument("convergence_rates: need at least three values");
  }
  if (!std::isfinite(limit)) {
    throw InvalidArgument("convergence_rates: limit must be finite");
  }
  std::vector<std::optional<double>> out;
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    double const num = std::abs(values[i + 1] - limit);
    double const den = std::abs(values[i] - limit);
    if (den == 0) {
      out.push_back(num == 0 ? std::nullopt : std::optional(std::numeric_limits<double>::infinity()));
    } else {
      out.push_back(num / den);
    }
  }
  return out;
}

}  // namespace mpass
