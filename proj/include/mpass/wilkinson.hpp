#pragma once

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mpass/errors.hpp"
#include "mpass/field.hpp"
#include "mpass/hyperplane.hpp"
#include "mpass/linalg.hpp"
#include "mpass/local.hpp"
#include "mpass/segment.hpp"

/**
 * \file wilkinson.hpp
 *
 * @brief Distance to the nearest matrix with a repeated eigenvalue, estimated as the value at which two
 * pseudospectral components first coalesce.
 *
 * The local level set iteration runs on sigma_min(A - zI) over the complex plane. Every one-dimensional subproblem
 * lives on a line segment, where Byers' eigenvalue test gives all level crossings at once.
 */

namespace mpass {

/// Axis-aligned box in the complex plane.
struct ComplexBox {
  Complex lower;
  Complex upper;

  bool contains(Complex z) const {
    return z.real() >= lower.real() && z.real() <= upper.real() && z.imag() >= lower.imag() &&
           z.imag() <= upper.imag();
  }
  Region region() const { return Region::box(to_point(lower), to_point(upper)); }
};

struct SigmaSegmentExtremum {
  Complex z;
  double sigma;
  /// Position on the segment, z = p + t (q - p).
  double t;
};

namespace detail {

  inline double sigma_on(const VerticalSegment& seg, double y) {
    return smallest_singular_value(shifted(seg.rotated, Complex(0, y)));
  }

  /// Maximal intervals of [0, L] on which sigma < eps (below) or sigma > eps (above), in height units.
  inline std::vector<std::pair<double, double>> level_intervals(const VerticalSegment& seg, double eps, bool below) {
    std::vector<double> cuts{0.0};
    for (double y : byers_vertical_crossings(seg.rotated, 0.0, eps)) {
      if (y > 0 && y < seg.length) {
        cuts.push_back(y);
      }
    }
    cuts.push_back(seg.length);
    std::vector<std::pair<double, double>> out;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      double const lo = cuts[k];
      double const hi = cuts[k + 1];
      if (!(hi > lo)) {
        continue;
      }
      double const v = sigma_on(seg, 0.5 * (lo + hi));
      if (below ? v < eps : v > eps) {
        if (!out.empty() && out.back().second == lo) {
          out.back().second = hi;
        } else {
          out.emplace_back(lo, hi);
        }
      }
    }
    return out;
  }

  /// Level-set iteration for the global extremum of sigma_min over a segment; sign = +1 minimizes, -1 maximizes.
  inline SigmaSegmentExtremum segment_extremum(const ComplexMatrix& a, Complex p, Complex q, double sign) {
    auto const seg = rotate_to_vertical(a, p, q);
    double const len = seg.length;
    auto better = [sign](double v, double best) { return sign * v < sign * best; };
    double best_y = 0;
    double best = sigma_on(seg, 0);
    for (double y : {len, 0.5 * len}) {
      double const v = sigma_on(seg, y);
      if (better(v, best)) {
        best = v;
        best_y = y;
      }
    }
    std::pair<double, double> bracket{0, len};
    for (int it = 0; it < 100; ++it) {
      if (sign > 0 && best <= 0) {
        break;
      }
      double const eps = best * (1 + sign * 2e-8);
      if (!(eps > 0)) {
        break;
      }
      auto const ivs = level_intervals(seg, eps, sign > 0);
      if (ivs.empty()) {
        break;
      }
      double widest = 0;
      bool improved = false;
      for (auto const& iv : ivs) {
        widest = std::max(widest, iv.second - iv.first);
        double const m = 0.5 * (iv.first + iv.second);
        double const v = sigma_on(seg, m);
        if (better(v, best)) {
          best = v;
          best_y = m;
          improved = true;
        }
        if (best_y >= iv.first && best_y <= iv.second) {
          bracket = iv;
        }
      }
      if (!improved || widest <= 1e-12 * len) {
        break;
      }
    }
    double const w = std::max(bracket.second - bracket.first, 1e-12 * len);
    double const lo = std::max(0.0, best_y - w);
    double const hi = std::min(len, best_y + w);
    if (hi > lo) {
      auto const [y, v] = boost::math::tools::brent_find_minima([&](double s) { return sign * sigma_on(seg, s); }, lo,
                                                                 hi, std::numeric_limits<double>::digits);
      if (better(sign * v, best)) {
        best = sign * v;
        best_y = y;
      }
    }
    return {seg.point_at(best_y), best, best_y / len};
  }

}  // namespace detail

/**
 * @brief Global minimum of sigma_min(A - zI) over the segment [p, q].
 *
 * The segment is rotated onto the imaginary axis. Starting from the best of the endpoints and the midpoint, each
 * sweep sets eps slightly above the best value, computes the sublevel intervals from Byers crossings and evaluates
 * their midpoints. A Brent search on the final interval finishes the job.
 */
inline SigmaSegmentExtremum segment_minimize_sigma(const ComplexMatrix& a, Complex p, Complex q) {
  return detail::segment_extremum(a, p, q, 1.0);
}

/// Global maximum of sigma_min(A - zI) over [p, q], by the super-level analogue of segment_minimize_sigma.
inline SigmaSegmentExtremum segment_maximize_sigma(const ComplexMatrix& a, Complex p, Complex q) {
  return detail::segment_extremum(a, p, q, -1.0);
}

/// Intervals (as positions t in [0, 1] of p + t(q - p)) where sigma_min < eps, or > eps when `below` is false.
inline std::vector<std::pair<double, double>> sigma_level_intervals(const ComplexMatrix& a, Complex p, Complex q,
                                                                    double eps, bool below = true) {
  auto const seg = rotate_to_vertical(a, p, q);
  auto ivs = detail::level_intervals(seg, eps, below);
  for (auto& iv : ivs) {
    iv.first /= seg.length;
    iv.second /= seg.length;
  }
  return ivs;
}

/**
 * @brief Furthest point w of [from, to] with sigma_min <= cap on all of [from, w].
 *
 * Crossings come from Byers' test; the first crossing into a super-level interval is then bracketed to adjacent
 * doubles. Returns `to` exactly when the whole segment stays below the cap.
 */
inline Complex sigma_advance(const ComplexMatrix& a, Complex from, Complex to, double cap) {
  double const eps = cap + level_slack(cap);
  double const f0 = smallest_singular_value(shifted(a, from));
  if (f0 > eps) {
    throw PreconditionViolation("sigma_advance: sigma at the start exceeds the cap");
  }
  if (from == to) {
    return to;
  }
  auto const seg = rotate_to_vertical(a, from, to);
  auto const above = detail::level_intervals(seg, eps, false);
  if (above.empty()) {
    return to;
  }
  auto excess = [&](double y) { return detail::sigma_on(seg, y) - eps; };
  if (excess(0) > 0) {
    // Rounding of the rotated matrix puts the start just above the cap.
    return from;
  }
  double const hi = 0.5 * (above.front().first + above.front().second);
  auto const [lo, unused] = detail::bracket_crossing(excess, 0.0, hi);
  return lo >= seg.length ? to : seg.point_at(lo);
}

namespace detail {

  /// Local-iteration subproblems for sigma_min, solved on segments with Byers' test.
  class SigmaSubsolver {
   public:
    SigmaSubsolver(const ComplexMatrix& a, ComplexBox box)
        : a_(&a), box_(box), region_(box.region()), field_(SigmaMinField(a).as_field()) {}

    const ScalarField& field() const { return field_; }
    const Region& region() const { return region_; }

    std::pair<Point, Point> equalize(const Point& x0, const Point& y0) const {
      return equalize_endpoints(field_, x0, y0);
    }

    LineMinimum bisector_minimum(const Point& x, const Point& y) const {
      Point const d = y - x;
      if (!(d.norm() > 0)) {
        throw InvalidArgument("bisector_minimum: x and y coincide");
      }
      Point const mid = 0.5 * (x + y);
      Point dir(2);
      dir << -d[1], d[0];
      dir /= dir.norm();
      auto clip = region_.clip_line(mid, dir);
      if (!clip || !region_.contains(mid)) {
        throw PreconditionViolation("bisector_minimum: midpoint outside the region");
      }
      Complex p = to_complex(mid + clip->first * dir);
      Complex q = to_complex(mid + clip->second * dir);
      auto m = segment_minimize_sigma(*a_, p, q);
      double const top = std::max(field_(x), field_(y));
      if (m.sigma <= top + level_slack(top)) {
        // The line meets another eigenvalue's component at or below the pair's level; keep to the basin of the
        // midpoint instead.
        auto const [lo, hi] = basin_bracket(mid, dir, clip->first, clip->second);
        p = to_complex(mid + lo * dir);
        q = to_complex(mid + hi * dir);
        m = segment_minimize_sigma(*a_, p, q);
      }
      Point const z = to_point(m.z);
      auto edge_descends = [&](double t, Complex outward) {
        Eigen::Vector2d const g = SigmaMinField(*a_).gradient(m.z);
        return t <= 1e-9 || t >= 1 - 1e-9 ? (g[0] * outward.real() + g[1] * outward.imag()) < 0 : false;
      };
      if ((m.t <= 1e-9 && edge_descends(m.t, p - q)) || (m.t >= 1 - 1e-9 && edge_descends(m.t, q - p))) {
        throw BoundaryHit("bisector_minimum: minimizer on the region boundary", z);
      }
      return {z, m.sigma};
    }

    Point advance(const Point& from, const Point& to, double cap) const {
      Complex const w = sigma_advance(*a_, to_complex(from), to_complex(to), cap);
      return w == to_complex(to) ? to : to_point(w);
    }

    SegmentMax segment_max(const Point& x, const Point& y) const {
      if (x == y) {
        return {field_(x), x};
      }
      auto const m = segment_maximize_sigma(*a_, to_complex(x), to_complex(y));
      return {m.sigma, to_point(m.z)};
    }

   private:
    /// Interval [lo, hi] of line parameters around a local minimum reached by descending from s = 0.
    std::pair<double, double> basin_bracket(const Point& mid, const Point& dir, double c0, double c1) const {
      auto g = [&](double s) { return field_(mid + s * dir); };
      double const h0 = (c1 - c0) / 1024;
      double const sign = g(std::min(h0, c1)) <= g(std::max(-h0, c0)) ? 1.0 : -1.0;
      double const edge = sign > 0 ? c1 : c0;
      double prev = 0;
      double cur = 0;
      double g_cur = g(0);
      double step = h0;
      for (;;) {
        double next = cur + sign * step;
        if (sign * (next - edge) > 0) {
          next = edge;
        }
        double const g_next = g(next);
        if (g_next >= g_cur) {
          return {std::min(prev, next), std::max(prev, next)};
        }
        if (next == edge) {
          return {std::min(cur, next), std::max(cur, next)};
        }
        prev = cur;
        cur = next;
        g_cur = g_next;
        step *= 2;
      }
    }

    const ComplexMatrix* a_;
    ComplexBox box_;
    Region region_;
    ScalarField field_;
  };

  inline double spectral_norm(const ComplexMatrix& a) { return singular_values(a)(0); }

}  // namespace detail

/**
 * @brief Box around the spectrum: its bounding box scaled by 1.5 about its center, plus 0.1 (1 + |A|_2) on
 * every side.
 */
inline ComplexBox spectrum_box(const ComplexMatrix& a, const std::vector<Complex>& spectrum) {
  double x0 = std::numeric_limits<double>::infinity();
  double x1 = -x0;
  double y0 = x0;
  double y1 = -x0;
  for (Complex z : spectrum) {
    x0 = std::min(x0, z.real());
    x1 = std::max(x1, z.real());
    y0 = std::min(y0, z.imag());
    y1 = std::max(y1, z.imag());
  }
  double const margin = 0.1 * (1.0 + detail::spectral_norm(a));
  double const wx = 0.25 * (x1 - x0) + margin;
  double const wy = 0.25 * (y1 - y0) + margin;
  return {Complex(x0 - wx, y0 - wy), Complex(x1 + wx, y1 + wy)};
}

struct VoronoiEdge {
  Complex p;
  Complex q;
  /// Indices into the spectrum of the two generators.
  std::size_t first;
  std::size_t second;
  /// Minimum of sigma_min over the edge; NaN until evaluated.
  double min_sigma = std::numeric_limits<double>::quiet_NaN();
  Complex argmin{};
};

/**
 * @brief Voronoi edges of a finite point set, clipped to `box`.
 *
 * Each pair's perpendicular bisector is intersected with the half-planes of all other points and the box; empty
 * pieces are dropped.
 */
inline std::vector<VoronoiEdge> voronoi_edges(const std::vector<Complex>& pts, const ComplexBox& box) {
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j) {
      seen = pts[j] == pts[i];
    }
    distinct += seen ? 0 : 1;
  }
  if (distinct < 2) {
    throw InvalidArgument("voronoi_edges: need at least two distinct points");
  }
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<VoronoiEdge> edges;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (pts[i] == pts[j]) {
        continue;
      }
      Complex const m = 0.5 * (pts[i] + pts[j]);
      Complex const d = Complex(0, 1) * (pts[j] - pts[i]) / std::abs(pts[j] - pts[i]);
      double t0 = -inf;
      double t1 = inf;
      // Constraint a + b t <= 0.
      auto cut = [&](double a, double b) {
        if (b == 0) {
          if (a > 0) {
            t0 = inf;
            t1 = -inf;
          }
          return;
        }
        double const t = -a / b;
        if (b > 0) {
          t1 = std::min(t1, t);
        } else {
          t0 = std::max(t0, t);
        }
      };
      cut(box.lower.real() - m.real(), -d.real());
      cut(m.real() - box.upper.real(), d.real());
      cut(box.lower.imag() - m.imag(), -d.imag());
      cut(m.imag() - box.upper.imag(), d.imag());
      for (std::size_t k = 0; k < pts.size(); ++k) {
        if (k == i || k == j || pts[k] == pts[i] || pts[k] == pts[j]) {
          continue;
        }
        // |z - p_i|^2 <= |z - p_k|^2  <=>  2 Re(z conj(p_k - p_i)) <= |p_k|^2 - |p_i|^2
        Complex const c = std::conj(pts[k] - pts[i]);
        double const rhs = std::norm(pts[k]) - std::norm(pts[i]);
        cut(2 * (m * c).real() - rhs, 2 * (d * c).real());
      }
      if (t1 - t0 > 1e-14 * (1.0 + std::abs(m))) {
        edges.push_back({m + t0 * d, m + t1 * d, i, j});
      }
    }
  }
  return edges;
}

struct VoronoiChoice {
  std::pair<Complex, Complex> pair;
  Complex seed;
  double edge_min;
  std::vector<VoronoiEdge> edges;
};

namespace detail {

  /// Throws DegenerateSpectrum when two eigenvalues are closer than 1e-10 |A|_2.
  inline void require_simple_spectrum(const ComplexMatrix& a, const std::vector<Complex>& eig) {
    double const tol = 1e-10 * spectral_norm(a);
    for (std::size_t i = 0; i < eig.size(); ++i) {
      for (std::size_t j = i + 1; j < eig.size(); ++j) {
        if (std::abs(eig[i] - eig[j]) <= tol) {
          throw DegenerateSpectrum("repeated eigenvalue: the distance to a defective matrix is zero");
        }
      }
    }
    if (eig.size() < 2) {
      throw InvalidArgument("matrix needs at least two eigenvalues");
    }
  }

}  // namespace detail

/**
 * @brief Pick the eigenvalue pair whose Voronoi edge carries the smallest value of sigma_min.
 */
inline VoronoiChoice voronoi_heuristic(const ComplexMatrix& a) {
  require_square_finite(a, "voronoi_heuristic");
  auto const eig = eigenvalues(a);
  detail::require_simple_spectrum(a, eig);
  auto edges = voronoi_edges(eig, spectrum_box(a, eig));
  std::size_t best = 0;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    auto const m = segment_minimize_sigma(a, edges[k].p, edges[k].q);
    edges[k].min_sigma = m.sigma;
    edges[k].argmin = m.z;
    if (m.sigma < edges[best].min_sigma || k == 0) {
      best = k;
    }
  }
  auto const& e = edges[best];
  return {{eig[e.first], eig[e.second]}, e.argmin, e.min_sigma, edges};
}

struct WilkinsonOptions {
  LocalOptions local{};
  /// Endpoints start at lambda_1 + t (lambda_2 - lambda_1) and lambda_2 - t (lambda_2 - lambda_1).
  double pull_in = 0.02;
  /// Also run every eigenvalue pair (or the `nearest_pairs` closest pairs when positive) and keep the minimum.
  bool exhaustive = false;
  int nearest_pairs = 0;
  bool compute_perturbation = true;
  /// Worker threads for exhaustive runs; results do not depend on it.
  int threads = 1;
};

/// One local run from an eigenvalue pair.
struct PairRun {
  std::pair<Complex, Complex> pair;
  LocalStatus status;
  double epsilon_bar;
  Complex coalescence_point;
};

struct WilkinsonResult {
  ComplexMatrix matrix;
  std::pair<Complex, Complex> chosen_pair;
  Complex coalescence_point{};
  double epsilon_bar_estimate = 0;
  std::vector<LocalIterate> records;
  LocalStatus status = LocalStatus::max_iterations;
  std::optional<ComplexMatrix> perturbation;
  /// The pair and value from the Voronoi heuristic alone.
  std::optional<std::pair<Complex, Complex>> heuristic_pair;
  std::optional<double> heuristic_epsilon;
  /// Set when the spectrum has a repeated eigenvalue (distance 0).
  std::optional<Complex> repeated_eigenvalue;
  /// Every pair run in exhaustive mode, in order.
  std::vector<PairRun> runs;
  std::vector<std::string> warnings;
};

struct DefectivePerturbation {
  ComplexMatrix e;
  double sigma;
  /// sigma_{n-1} - sigma_n at z.
  double singular_gap;
  std::optional<std::string> warning;
};

/**
 * @brief Rank-one E = -sigma u v^H of norm sigma_min(A - zI) making z an eigenvalue of A + E.
 */
inline DefectivePerturbation nearest_defective_perturbation(const ComplexMatrix& a, Complex z) {
  auto const t = smallest_singular_triplet(shifted(a, z));
  DefectivePerturbation out{ComplexMatrix::Zero(a.rows(), a.cols()), t.sigma, t.gap, std::nullopt};
  if (t.sigma > 0) {
    out.e = -t.sigma * t.u * t.v.adjoint();
  }
  if (t.gap < 1e-10) {
    out.warning = "ill-conditioned singular vectors: smallest singular value is not simple";
  }
  return out;
}

namespace detail {

  inline void require_eigenvalue(const ComplexMatrix& a, Complex lambda) {
    double const tol = 1e-8 * (1.0 + spectral_norm(a));
    if (!(smallest_singular_value(shifted(a, lambda)) <= tol)) {
      throw InvalidArgument("wilkinson_local: point is not an eigenvalue");
    }
  }

  inline WilkinsonResult run_pair(const ComplexMatrix& a, const ComplexBox& box, Complex l1, Complex l2,
                                  const WilkinsonOptions& opts) {
    WilkinsonResult out;
    out.matrix = a;
    out.chosen_pair = {l1, l2};
    SigmaSubsolver s(a, box);
    Complex const d = l2 - l1;
    auto res = run_local(s, to_point(l1 + opts.pull_in * d), to_point(l2 - opts.pull_in * d), opts.local);
    out.status = res.status;
    auto const& last = res.records.back();
    out.coalescence_point = to_complex(last.z);
    out.epsilon_bar_estimate = last.f_z;
    out.records = std::move(res.records);
    return out;
  }

}  // namespace detail

/**
 * @brief Local iteration between the eigenvalues lambda_1 and lambda_2 on sigma_min over the spectrum box.
 */
inline WilkinsonResult wilkinson_local(const ComplexMatrix& a, Complex l1, Complex l2,
                                       const WilkinsonOptions& opts = {}) {
  require_square_finite(a, "wilkinson_local");
  if (l1 == l2) {
    throw InvalidArgument("wilkinson_local: eigenvalues must differ");
  }
  if (!(opts.pull_in > 0 && opts.pull_in < 0.5)) {
    throw InvalidArgument("wilkinson_local: pull_in must lie in (0, 1/2)");
  }
  detail::require_eigenvalue(a, l1);
  detail::require_eigenvalue(a, l2);
  auto out = detail::run_pair(a, spectrum_box(a, eigenvalues(a)), l1, l2, opts);
  if (opts.compute_perturbation && out.status == LocalStatus::converged) {
    auto pert = nearest_defective_perturbation(a, out.coalescence_point);
    out.perturbation = std::move(pert.e);
    if (pert.warning) {
      out.warnings.push_back(*pert.warning);
    }
  }
  return out;
}

/**
 * @brief Wilkinson distance estimate: the Voronoi heuristic pair, optionally compared against other pairs.
 *
 * The result is a local estimate, not a certificate of the global minimum.
 */
inline WilkinsonResult wilkinson_distance(const ComplexMatrix& a, const WilkinsonOptions& opts = {}) {
  require_square_finite(a, "wilkinson_distance");
  auto const eig = eigenvalues(a);
  try {
    detail::require_simple_spectrum(a, eig);
  } catch (const DegenerateSpectrum&) {
    double const tol = 1e-10 * detail::spectral_norm(a);
    WilkinsonResult out;
    out.matrix = a;
    for (std::size_t i = 0; i < eig.size() && !out.repeated_eigenvalue; ++i) {
      for (std::size_t j = i + 1; j < eig.size(); ++j) {
        if (std::abs(eig[i] - eig[j]) <= tol) {
          out.repeated_eigenvalue = eig[i];
          out.chosen_pair = {eig[i], eig[j]};
          out.coalescence_point = eig[i];
          break;
        }
      }
    }
    out.epsilon_bar_estimate = 0;
    out.status = LocalStatus::converged;
    if (opts.compute_perturbation) {
      out.perturbation = ComplexMatrix::Zero(a.rows(), a.cols());
    }
    return out;
  }

  auto const box = spectrum_box(a, eig);
  auto const choice = voronoi_heuristic(a);
  WilkinsonResult best = detail::run_pair(a, box, choice.pair.first, choice.pair.second, opts);
  best.heuristic_pair = choice.pair;
  best.heuristic_epsilon = best.epsilon_bar_estimate;
  best.runs.push_back({choice.pair, best.status, best.epsilon_bar_estimate, best.coalescence_point});

  if (opts.exhaustive) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < eig.size(); ++i) {
      for (std::size_t j = i + 1; j < eig.size(); ++j) {
        pairs.emplace_back(i, j);
      }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [&](auto const& u, auto const& v) {
      return std::abs(eig[u.first] - eig[u.second]) < std::abs(eig[v.first] - eig[v.second]);
    });
    if (opts.nearest_pairs > 0 && pairs.size() > static_cast<std::size_t>(opts.nearest_pairs)) {
      pairs.resize(static_cast<std::size_t>(opts.nearest_pairs));
    }
    auto run_one = [&](std::size_t k) -> std::optional<WilkinsonResult> {
      Complex const l1 = eig[pairs[k].first];
      Complex const l2 = eig[pairs[k].second];
      try {
        return detail::run_pair(a, box, l1, l2, opts);
      } catch (const std::exception&) {
        return std::nullopt;
      }
    };
    std::vector<std::optional<WilkinsonResult>> results(pairs.size());
    std::size_t const workers = static_cast<std::size_t>(std::max(1, opts.threads));
    for (std::size_t start = 0; start < pairs.size(); start += workers) {
      std::vector<std::future<std::optional<WilkinsonResult>>> batch;
      for (std::size_t k = start; k < std::min(pairs.size(), start + workers); ++k) {
        batch.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, run_one, k));
      }
      for (std::size_t k = 0; k < batch.size(); ++k) {
        results[start + k] = batch[k].get();
      }
    }
    for (auto& r : results) {
      if (!r) {
        continue;
      }
      best.runs.push_back({r->chosen_pair, r->status, r->epsilon_bar_estimate, r->coalescence_point});
      bool const usable = r->status == LocalStatus::converged;
      bool const best_usable = best.status == LocalStatus::converged;
      if (usable && (!best_usable || r->epsilon_bar_estimate < best.epsilon_bar_estimate)) {
        auto heuristic_pair = best.heuristic_pair;
        auto heuristic_eps = best.heuristic_epsilon;
        auto runs = std::move(best.runs);
        best = std::move(*r);
        best.heuristic_pair = heuristic_pair;
        best.heuristic_epsilon = heuristic_eps;
        best.runs = std::move(runs);
      }
    }
  }

  if (opts.compute_perturbation && best.status == LocalStatus::converged) {
    auto pert = nearest_defective_perturbation(a, best.coalescence_point);
    best.perturbation = std::move(pert.e);
    if (pert.warning) {
      best.warnings.push_back(*pert.warning);
    }
  }
  return best;
}

struct PseudospectrumGrid {
  ComplexBox box;
  int nx = 0;
  int ny = 0;
  /// Row-major with y outer: values[j * nx + i] at (x_i, y_j).
  std::vector<double> values;

  double x(int i) const { return box.lower.real() + (box.upper.real() - box.lower.real()) * i / (nx - 1); }
  double y(int j) const { return box.lower.imag() + (box.upper.imag() - box.lower.imag()) * j / (ny - 1); }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * nx + i]; }
};

/**
 * @brief sigma_min(A - zI) at the nx x ny nodes of `box`, corners included.
 */
inline PseudospectrumGrid pseudospectrum_grid(const ComplexMatrix& a, const ComplexBox& box, int nx, int ny,
                                              int threads = 1) {
  require_square_finite(a, "pseudospectrum_grid");
  if (nx < 2 || ny < 2) {
    throw InvalidArgument("pseudospectrum_grid: need at least 2 nodes per axis");
  }
  if (!(box.lower.real() < box.upper.real()) || !(box.lower.imag() < box.upper.imag()) ||
      !std::isfinite(std::abs(box.lower)) || !std::isfinite(std::abs(box.upper))) {
    throw InvalidArgument("pseudospectrum_grid: invalid box");
  }
  PseudospectrumGrid g{box, nx, ny, std::vector<double>(static_cast<std::size_t>(nx) * ny)};
  auto fill_rows = [&](int j0, int j1) {
    for (int j = j0; j < j1; ++j) {
      for (int i = 0; i < nx; ++i) {
        g.values[static_cast<std::size_t>(j) * nx + i] = smallest_singular_value(shifted(a, Complex(g.x(i), g.y(j))));
      }
    }
  };
  int const workers = std::clamp(threads, 1, ny);
  if (workers == 1) {
    fill_rows(0, ny);
    return g;
  }
  std::vector<std::future<void>> jobs;
  for (int w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, fill_rows, ny * w / workers, ny * (w + 1) / workers));
  }
  for (auto& j : jobs) {
    j.get();
  }
  return g;
}

}  // namespace mpass
