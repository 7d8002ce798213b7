#pragma once

#include <random>
#include <string>

#include "mpass/mpass.hpp"

namespace mpass::test {

inline std::string data_path(const std::string& name) { return std::string(MPASS_DATA_DIR) + "/" + name; }

inline ComplexMatrix example81() { return load_matrix(data_path("example81.txt")); }
inline ComplexMatrix example82() { return load_matrix(data_path("example82.json")); }

inline constexpr double example81_epsilon = 6.151109286142E-4;

inline Point pt(double x, double y) { return detail::vec({x, y}); }
inline Point pt(double x, double y, double z) { return detail::vec({x, y, z}); }

inline ComplexMatrix random_matrix(int n, std::mt19937& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a(i, j) = Complex(g(rng), g(rng));
    }
  }
  return a;
}

inline ComplexMatrix diag(std::initializer_list<Complex> d) {
  ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (Complex z : d) {
    a(i, i) = z;
    ++i;
  }
  return a;
}

}  // namespace mpass::test

namespace mpass::test {

/// Crossings of eps by any singular value of A - (x + iy) I, from sign changes on a uniform y grid refined by
/// bisection.
inline std::vector<double> scan_crossings(const ComplexMatrix& a, double x, double eps, double y_lo, double y_hi,
                                          int samples = 10000) {
  auto sv = [&](double y) { return singular_values(shifted(a, Complex(x, y))); };
  std::vector<double> out;
  Eigen::VectorXd prev = sv(y_lo);
  double y_prev = y_lo;
  for (int k = 1; k <= samples; ++k) {
    double const y = y_lo + (y_hi - y_lo) * k / samples;
    Eigen::VectorXd cur = sv(y);
    for (Eigen::Index m = 0; m < cur.size(); ++m) {
      if ((prev[m] - eps) * (cur[m] - eps) < 0) {
        double lo = y_prev;
        double hi = y;
        double const s_lo = prev[m] - eps;
        for (int it = 0; it < 60; ++it) {
          double const mid = 0.5 * (lo + hi);
          ((sv(mid)[m] - eps) * s_lo > 0 ? lo : hi) = mid;
        }
        out.push_back(0.5 * (lo + hi));
      }
    }
    prev = std::move(cur);
    y_prev = y;
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Minimizer of sigma_min(A - zI) on [p, q] by a dense scan followed by golden-section search.
inline std::pair<double, double> scan_segment_min(const ComplexMatrix& a, Complex p, Complex q, double sign = 1,
                                                  int samples = 100000) {
  auto g = [&](double t) { return sign * smallest_singular_value(shifted(a, p + t * (q - p))); };
  int best = 0;
  double best_v = g(0);
  for (int k = 1; k <= samples; ++k) {
    double const v = g(static_cast<double>(k) / samples);
    if (v < best_v) {
      best_v = v;
      best = k;
    }
  }
  double lo = std::max(0, best - 1) / static_cast<double>(samples);
  double hi = std::min(samples, best + 1) / static_cast<double>(samples);
  double const r = (std::sqrt(5.0) - 1) / 2;
  double c = hi - r * (hi - lo);
  double d = lo + r * (hi - lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (g(c) < g(d)) {
      hi = d;
    } else {
      lo = c;
    }
    c = hi - r * (hi - lo);
    d = lo + r * (hi - lo);
  }
  double const t = 0.5 * (lo + hi);
  return g(t) <= best_v ? std::pair{t, sign * g(t)} : std::pair{best / static_cast<double>(samples), sign * best_v};
}

}  // namespace mpass::test
