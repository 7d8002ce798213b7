#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mpass/field.hpp"

/**
 * \file problems.hpp
 *
 * @brief Catalog of analytic mountain-pass test problems.
 */

namespace mpass {

struct KnownSaddle {
  Point point;
  double value;
};

struct TestProblem {
  std::string name;
  ScalarField field;
  Region region;
  Point a;
  Point b;
  std::optional<KnownSaddle> known_saddle;
};

namespace detail {

  inline Point vec(std::initializer_list<double> xs) {
    Point p(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index i = 0;
    for (double x : xs) {
      p[i++] = x;
    }
    return p;
  }

}  // namespace detail

/// f(x) = x1^2 - x2^2 + 0.1 x1^3 + 0.05 x2^4; a C^2 perturbation of the planar saddle, critical point at 0.
inline ScalarField make_perturbed_quadratic_field() {
  return ScalarField(
      2,
      [](const Point& x) {
        return x[0] * x[0] - x[1] * x[1] + 0.1 * x[0] * x[0] * x[0] + 0.05 * std::pow(x[1], 4);
      },
      [](const Point& x) -> Point {
        return detail::vec({2 * x[0] + 0.3 * x[0] * x[0], -2 * x[1] + 0.2 * x[1] * x[1] * x[1]});
      });
}

inline std::vector<TestProblem> builtin_problems() {
  using detail::vec;
  std::vector<TestProblem> out;

  out.push_back({"quadratic-saddle", make_quadratic_field(vec({1, -1})), Region::box(vec({-2, -2}), vec({2, 2})),
                 vec({0, -1}), vec({0, 1}), KnownSaddle{vec({0, 0}), 0.0}});

  out.push_back({"quadratic-3d", make_quadratic_field(vec({3, 2, -1})),
                 Region::box(vec({-2, -2, -2}), vec({2, 2, 2})), vec({0, 0, -1}), vec({0, 0, 1}),
                 KnownSaddle{vec({0, 0, 0}), 0.0}});

  out.push_back({"perturbed-quadratic", make_perturbed_quadratic_field(), Region::box(vec({-1.5, -1.5}), vec({1.5, 1.5})),
                 vec({0, -1}), vec({0, 1}), KnownSaddle{vec({0, 0}), 0.0}});

  // Two sublevel components whose distance tends to zero without a minimizing pair (no Palais-Smale).
  out.push_back({"ps-fail-a",
                 ScalarField(
                     2, [](const Point& x) { return std::exp(-x[0]) - x[1] * x[1]; },
                     [](const Point& x) -> Point { return vec({-std::exp(-x[0]), -2 * x[1]}); }),
                 Region::box(vec({0, -2}), vec({10, 2})), vec({1, -1.5}), vec({1, 1.5}), std::nullopt});

  out.push_back({"ps-fail-b",
                 ScalarField(
                     2, [](const Point& x) { return std::exp(-2 * x[0]) - x[1] * x[1] * std::exp(-x[0]); },
                     [](const Point& x) -> Point {
                       double const e1 = std::exp(-x[0]);
                       return vec({-2 * e1 * e1 + x[1] * x[1] * e1, -2 * x[1] * e1});
                     }),
                 Region::box(vec({0, -2}), vec({10, 2})), vec({1, -1.5}), vec({1, 1.5}), std::nullopt});

  out.push_back({"plateau", ScalarField(1,
                                        [](const Point& x) {
                                          double const t = x[0];
                                          if (t <= -1) {
                                            return t;
                                          }
                                          if (t >= 1) {
                                            return -t;
                                          }
                                          return -1.0;
                                        }),
                 Region::box(vec({-3}), vec({3})), vec({-2}), vec({2}), std::nullopt});

  // Lobes of lev<=0 f touch at (0,0) and (1,1); both are nondegenerate index-1 saddles with value 0.
  out.push_back({"double-well-curve",
                 ScalarField(
                     2, [](const Point& x) { return (x[1] - x[0] * x[0]) * (x[0] - x[1] * x[1]); },
                     [](const Point& x) -> Point {
                       double const p = x[1] - x[0] * x[0];
                       double const q = x[0] - x[1] * x[1];
                       return vec({-2 * x[0] * q + p, q - 2 * x[1] * p});
                     }),
                 Region::box(vec({0.5, 0.5}), vec({1.5, 1.5})), vec({1.2, 0.8}), vec({0.8, 1.2}),
                 KnownSaddle{vec({1, 1}), 0.0}});

  out.push_back({"sqrt-cusp", ScalarField(1, [](const Point& x) { return -std::sqrt(std::abs(x[0])); }),
                 Region::box(vec({-2}), vec({2})), vec({-1}), vec({1}), KnownSaddle{vec({0}), 0.0}});

  out.push_back({"sqrt-cusp-2d",
                 ScalarField(2, [](const Point& x) { return -std::sqrt(std::abs(x[0])) + x[1] * x[1]; }),
                 Region::box(vec({-2, -2}), vec({2, 2})), vec({-1, 0}), vec({1, 0}), KnownSaddle{vec({0, 0}), 0.0}});

  return out;
}

/// Catalog lookup by name; nullopt when unknown.
inline std::optional<TestProblem> find_problem(std::string_view name) {
  for (auto& p : builtin_problems()) {
    if (p.name == name) {
      return std::move(p);
    }
  }
  return std::nullopt;
}

}  // namespace mpass
