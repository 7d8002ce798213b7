#pragma once

#include <Eigen/Dense>

#include "mpass/field.hpp"

namespace mpass {

/// Central second differences of f with step 1e-4 (1 + |x|), symmetrized.
inline Eigen::MatrixXd fd_hessian(const ScalarField& f, const Point& x) {
  Eigen::Index const n = x.size();
  double const h = 1e-4 * (1.0 + x.norm());
  Eigen::MatrixXd hess(n, n);
  Point p = x;
  double const f0 = f(x);
  for (Eigen::Index i = 0; i < n; ++i) {
    p[i] = x[i] + h;
    double const fp = f(p);
    p[i] = x[i] - h;
    double const fm = f(p);
    p[i] = x[i];
    hess(i, i) = (fp - 2 * f0 + fm) / (h * h);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      auto at = [&](double si, double sj) {
        Point q = x;
        q[i] += si * h;
        q[j] += sj * h;
        return f(q);
      };
      hess(i, j) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * h * h);
      hess(j, i) = hess(i, j);
    }
  }
  return hess;
}

/// Hessian from central differences of the (analytic or finite-difference) gradient, symmetrized.
inline Eigen::MatrixXd gradient_fd_hessian(const ScalarField& f, const Point& x) {
  Eigen::Index const n = x.size();
  double const h = 1e-5 * (1.0 + x.norm());
  Eigen::MatrixXd hess(n, n);
  Point p = x;
  for (Eigen::Index j = 0; j < n; ++j) {
    p[j] = x[j] + h;
    Point const gp = f.gradient_or_fd(p);
    p[j] = x[j] - h;
    Point const gm = f.gradient_or_fd(p);
    p[j] = x[j];
    hess.col(j) = (gp - gm) / (2 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

}  // namespace mpass
