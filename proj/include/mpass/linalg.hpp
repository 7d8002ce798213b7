#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "mpass/errors.hpp"
#include "mpass/field.hpp"

/**
 * \file linalg.hpp
 *
 * @brief Dense complex kernels for the pseudospectral field: smallest singular values, eigenvalues and the
 * Byers level-crossing test.
 */

namespace mpass {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline void require_square_finite(const ComplexMatrix& a, const char* who) {
  if (a.rows() == 0 || a.rows() != a.cols()) {
    throw InvalidArgument(std::string(who) + ": matrix must be square and non-empty");
  }
  if (!a.allFinite()) {
    throw InvalidArgument(std::string(who) + ": matrix has non-finite entries");
  }
}

inline double smallest_singular_value(const ComplexMatrix& a) {
  require_square_finite(a, "smallest_singular_value");
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(a.rows() - 1);
}

/// Smallest singular value with its singular vectors: a v = sigma u.
struct SingularTriplet {
  double sigma;
  ComplexVector u;
  ComplexVector v;
  /// sigma_{n-1} - sigma_n; +inf for 1x1 matrices.
  double gap;
};

inline SingularTriplet smallest_singular_triplet(const ComplexMatrix& a) {
  require_square_finite(a, "smallest_singular_triplet");
  Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Index const n = a.rows();
  auto const& s = svd.singularValues();
  double const gap = n > 1 ? s(n - 2) - s(n - 1) : std::numeric_limits<double>::infinity();
  return {s(n - 1), svd.matrixU().col(n - 1), svd.matrixV().col(n - 1), gap};
}

/// All singular values, descending.
inline Eigen::VectorXd singular_values(const ComplexMatrix& a) {
  require_square_finite(a, "singular_values");
  return Eigen::JacobiSVD<ComplexMatrix>(a).singularValues();
}

/// Eigenvalues ordered lexicographically by (real, imag).
inline std::vector<Complex> eigenvalues(const ComplexMatrix& a) {
  require_square_finite(a, "eigenvalues");
  Eigen::ComplexEigenSolver<ComplexMatrix> es(a, false);
  if (es.info() != Eigen::Success) {
    throw Error("eigenvalues: QR iteration did not converge");
  }
  std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + a.rows());
  std::sort(out.begin(), out.end(), [](Complex p, Complex q) {
    return p.real() != q.real() ? p.real() < q.real() : p.imag() < q.imag();
  });
  return out;
}

inline ComplexMatrix shifted(const ComplexMatrix& a, Complex z) {
  ComplexMatrix m = a;
  m.diagonal().array() -= z;
  return m;
}

/**
 * @brief Heights y at which epsilon is a singular value of A - (x + iy) I, ascending.
 *
 * epsilon is a singular value of A - (x + iy) I exactly when iy is an eigenvalue of
 *
 *     [ x I - A^H   -eps I  ]
 *     [ eps I       A - x I ]
 *
 * Eigenvalues with |Re| <= 1e-8 (1 + |H|_F) are accepted as imaginary. Near tangential contacts the real part
 * can exceed that; such candidates (|Re| <= 1e-4 scale) are kept when a direct SVD confirms the crossing.
 * Crossings closer than 1e-10 are merged.
 */
inline std::vector<double> byers_vertical_crossings(const ComplexMatrix& a, double x, double epsilon) {
  require_square_finite(a, "byers_vertical_crossings");
  if (!(epsilon > 0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("byers_vertical_crossings: epsilon must be positive");
  }
  Eigen::Index const n = a.rows();
  ComplexMatrix h(2 * n, 2 * n);
  ComplexMatrix const id = ComplexMatrix::Identity(n, n);
  h.topLeftCorner(n, n) = x * id - a.adjoint();
  h.topRightCorner(n, n) = -epsilon * id;
  h.bottomLeftCorner(n, n) = epsilon * id;
  h.bottomRightCorner(n, n) = a - x * id;

  double const scale = 1.0 + h.norm();
  Eigen::ComplexEigenSolver<ComplexMatrix> es(h, false);
  if (es.info() != Eigen::Success) {
    throw Error("byers_vertical_crossings: eigen-solver did not converge");
  }

  std::vector<double> ys;
  for (Eigen::Index k = 0; k < 2 * n; ++k) {
    Complex const lam = es.eigenvalues()(k);
    double const re = std::abs(lam.real());
    if (re <= 1e-8 * scale) {
      ys.push_back(lam.imag());
    } else if (re <= 1e-4 * scale) {
      Eigen::VectorXd const s = singular_values(shifted(a, Complex(x, lam.imag())));
      if ((s.array() - epsilon).abs().minCoeff() <= 1e-8 * scale) {
        ys.push_back(lam.imag());
      }
    }
  }
  std::sort(ys.begin(), ys.end());

  std::vector<double> merged;
  for (std::size_t i = 0; i < ys.size();) {
    std::size_t j = i + 1;
    double sum = ys[i];
    while (j < ys.size() && ys[j] - ys[j - 1] <= 1e-10) {
      sum += ys[j];
      ++j;
    }
    merged.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  return merged;
}

/**
 * @brief A segment [p, q] of the complex plane mapped onto the vertical segment {i y : y in [0, |q - p|]}.
 *
 * With w = (q - p)/|q - p| and the unimodular c = i conj(w), the matrix B = c (A - p I) satisfies
 * sigma_min(B - i y I) = sigma_min(A - (p + y w) I).
 */
struct VerticalSegment {
  ComplexMatrix rotated;
  Complex rotation;
  Complex origin;
  Complex direction;
  double length;
  /// Abscissa of the image line (always 0 here).
  double x0 = 0.0;

  Complex point_at(double y) const { return origin + y * direction; }
};

inline VerticalSegment rotate_to_vertical(const ComplexMatrix& a, Complex p, Complex q) {
  require_square_finite(a, "rotate_to_vertical");
  double const len = std::abs(q - p);
  if (!(len > 0)) {
    throw InvalidArgument("rotate_to_vertical: segment endpoints coincide");
  }
  Complex const w = (q - p) / len;
  Complex const c = Complex(0, 1) * std::conj(w);
  return {c * shifted(a, p), c, p, w, len};
}

/**
 * @brief The pseudospectral field z -> sigma_min(A - z I) on C = R^2.
 */
class SigmaMinField {
 public:
  explicit SigmaMinField(ComplexMatrix a) : a_(std::move(a)) { require_square_finite(a_, "SigmaMinField"); }

  const ComplexMatrix& matrix() const { return a_; }

  double operator()(Complex z) const { return smallest_singular_value(shifted(a_, z)); }

  /// Gradient in (Re z, Im z); valid where the smallest singular value is simple and positive.
  Eigen::Vector2d gradient(Complex z) const {
    auto const t = smallest_singular_triplet(shifted(a_, z));
    Complex const uv = t.u.dot(t.v);  // u^H v
    return {-uv.real(), uv.imag()};
  }

  ScalarField as_field() const {
    auto self = *this;
    return ScalarField(
        2, [self](const Point& p) { return self(Complex(p[0], p[1])); },
        [self](const Point& p) -> Point { return self.gradient(Complex(p[0], p[1])); });
  }

 private:
  ComplexMatrix a_;
};

inline Point to_point(Complex z) {
  Point p(2);
  p << z.real(), z.imag();
  return p;
}

inline Complex to_complex(const Point& p) { return {p[0], p[1]}; }

}  // namespace mpass
