#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <random>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"

using namespace mpass;

namespace {

int failures = 0;
std::ofstream report_file("acceptance_report.txt");

void report(int n, bool ok, const std::string& detail) {
  std::string const line = std::string(ok ? "PASS" : "FAIL") + " criterion " + std::to_string(n) + ": " + detail;
  std::cout << line << std::endl;
  report_file << line << std::endl;
  failures += ok ? 0 : 1;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Run {
  int code;
  std::string out;
};

Run cli(const std::string& args) {
  std::string const cmd = std::string(MPASS_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) {
    return {-1, ""};
  }
  std::string out;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) {
    out.append(buf, n);
  }
  int const status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

/// Saddle of x1^2 - x2^2 + 0.1 x1^3 + 0.05 x2^4 by damped Newton on the analytic gradient.
Eigen::Vector2d perturbed_quadratic_saddle(Eigen::Vector2d x) {
  auto grad = [](const Eigen::Vector2d& p) {
    return Eigen::Vector2d(2 * p[0] + 0.3 * p[0] * p[0], -2 * p[1] + 0.2 * p[1] * p[1] * p[1]);
  };
  for (int k = 0; k < 100; ++k) {
    Eigen::Vector2d const g = grad(x);
    if (g.norm() < 1e-15) {
      break;
    }
    Eigen::Vector2d const step(g[0] / (2 + 0.6 * x[0]), g[1] / (-2 + 0.6 * x[1] * x[1]));
    double t = 1;
    while (t > 1e-8 && grad(x - t * step).norm() >= g.norm()) {
      t *= 0.5;
    }
    x -= t * step;
  }
  return x;
}

void criterion1() {
  auto const t0 = std::chrono::steady_clock::now();
  auto const r = cli("wilkinson --matrix " + test::data_path("example81.txt"));
  double const secs = seconds_since(t0);
  if (r.code != 0) {
    report(1, false, "wilkinson exited with " + std::to_string(r.code));
    return;
  }
  auto const j = nlohmann::json::parse(r.out);
  double const eps = j.at("epsilon_bar").get<double>();
  double const rel = std::abs(eps / test::example81_epsilon - 1);
  std::vector<double> gaps;
  double final_dist = 0;
  for (auto const& rec : j.at("records")) {
    if (rec.at("i").get<int>() >= 1) {
      gaps.push_back(rec.at("gap_ratio").get<double>());
    }
    final_dist = rec.at("dist").get<double>();
  }
  bool trend = gaps.size() >= 2 && gaps.front() >= 1e-4 && gaps.front() < 1e-2 && gaps.back() < 1e-11;
  for (std::size_t k = 1; k < gaps.size(); ++k) {
    trend = trend && gaps[k] < gaps[k - 1];
    if (gaps[k - 1] < 1e-3) {
      trend = trend && gaps[k] <= std::pow(gaps[k - 1], 1.5);
    }
  }
  std::string seq;
  for (double g : gaps) {
    seq += (seq.empty() ? "" : " ") + num(g);
  }
  report(1, rel <= 1e-9 && trend && final_dist <= 1e-7 && secs < 10,
         "eps_bar=" + num(eps) + " rel_err=" + num(rel) + " gap_ratio=[" + seq + "] final_dist=" + num(final_dist) +
             " time=" + num(secs) + "s");
}

void criterion2() {
  bool ok = true;
  std::string detail;
  for (auto name : {"quadratic-saddle", "quadratic-3d"}) {
    auto const p = *find_problem(name);
    auto const t0 = std::chrono::steady_clock::now();
    auto const r = run_local(p.field, p.region, p.a, p.b);
    double const secs = seconds_since(t0);
    double const err = r.records.front().z.norm();
    ok = ok && err <= 1e-12 && secs < 0.1;
    detail += std::string(name) + ": |z0|=" + num(err) + " time=" + num(secs) + "s; ";
  }
  report(2, ok, detail);
}

/// Ratios |x_{i+1} - s| / |x_i - s| over the pairs the iteration works with.
std::vector<double> distance_ratios(const LocalResult& r, const Point& s) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < r.records.size(); ++i) {
    double const d0 = (r.records[i].x - s).norm();
    double const d1 = (r.records[i + 1].x - s).norm();
    if (d0 > 0) {
      out.push_back(d1 / d0);
    }
  }
  return out;
}

bool ratio_property(const std::vector<double>& q) {
  bool fast = false;
  for (std::size_t i = 0; i < q.size() && i < 5; ++i) {
    fast = fast || q[i] < 0.1;
  }
  if (q.size() < 3) {
    return false;
  }
  return fast && q[q.size() - 1] < q[q.size() - 2] && q[q.size() - 2] < q[q.size() - 3];
}

void criterion3() {
  auto const p = *find_problem("perturbed-quadratic");
  Point const s = perturbed_quadratic_saddle(Eigen::Vector2d(0.05, -0.05));
  std::string detail = "saddle=(" + num(s[0]) + "," + num(s[1]) + ")";
  bool ok = true;
  for (bool step1a : {true, false}) {
    LocalOptions opts;
    opts.do_step_1a = step1a;
    opts.point_tol = 1e-14;
    auto const r = run_local(p.field, p.region, test::pt(0.3, -0.8), test::pt(-0.2, 0.9), opts);
    auto const q = distance_ratios(r, s);
    std::string seq;
    for (double v : q) {
      seq += (seq.empty() ? "" : " ") + num(v);
    }
    bool const pass = ratio_property(q);
    ok = ok && pass;
    detail += std::string(step1a ? "; with closest-pair step" : "; without closest-pair step") + ": iterations=" +
              std::to_string(r.records.size()) + " final |x-s|=" + num((r.records.back().x - s).norm()) +
              " ratios=[" + seq + "]" + (pass ? "" : " (needs 3 monotone ratios)");
  }
  report(3, ok, detail);
}

void criterion4() {
  bool ok = true;
  int local_checks = 0;
  int bisect_checks = 0;
  std::string detail;
  for (auto const& p : builtin_problems()) {
    if (!p.known_saddle) {
      continue;
    }
    double const v = p.known_saddle->value;
    double const tol = 1e-12;
    try {
      auto const r = run_local(p.field, p.region, p.a, p.b);
      for (auto const& rec : r.records) {
        bool const good = rec.f_z <= v + tol && v - tol <= rec.M;
        if (!good) {
          detail += p.name + " local i=" + std::to_string(rec.index) + " violated; ";
        }
        ok = ok && good;
        ++local_checks;
      }
    } catch (const std::exception& e) {
      detail += p.name + " local: " + e.what() + "; ";
      ok = false;
    }
    if (p.field.dimension() != 2) {
      continue;
    }
    BisectionOptions bo;
    bo.max_iter = 40;
    auto const st = bisect(p, std::nullopt, std::nullopt, bo);
    double prev_width = std::numeric_limits<double>::quiet_NaN();
    bool first = true;
    for (auto const& h : st.history) {
      double const w = h.upper - h.lower;
      bool good = h.lower <= v + tol && v - tol <= h.upper;
      if (!first) {
        good = good && w == 0.5 * prev_width;
      }
      if (!good) {
        detail += p.name + " bisection step violated; ";
      }
      ok = ok && good;
      prev_width = w;
      first = false;
      ++bisect_checks;
    }
  }
  report(4, ok && local_checks > 0 && bisect_checks > 0,
         "local iterations checked=" + std::to_string(local_checks) +
             " bisection iterations checked=" + std::to_string(bisect_checks) + (detail.empty() ? "" : "; " + detail));
}

void criterion5() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  std::uniform_real_distribution<double> s(0.5, 2.0);
  int matched = 0;
  int crossings = 0;
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    ComplexMatrix const a = test::random_matrix(5, rng);
    double const x = u(rng);
    double const eps = s(rng) * smallest_singular_value(shifted(a, Complex(x, u(rng))));
    double const r = singular_values(a)[0] + std::abs(x) + eps + 1;
    auto const oracle = test::scan_crossings(a, x, eps, -r, r);
    auto const byers = byers_vertical_crossings(a, x, eps);
    if (byers.size() != oracle.size()) {
      continue;
    }
    double d = 0;
    for (std::size_t k = 0; k < oracle.size(); ++k) {
      d = std::max(d, std::abs(byers[k] - oracle[k]));
    }
    worst = std::max(worst, d);
    crossings += static_cast<int>(oracle.size());
    matched += d <= 1e-6 ? 1 : 0;
  }
  report(5, matched == 20,
         "matched " + std::to_string(matched) + "/20 cases, " + std::to_string(crossings) +
             " crossings, max deviation=" + num(worst));
}

void criterion6() {
  auto const c = voronoi_heuristic(test::example81());
  auto near = [](Complex z, Complex w) { return std::abs(z - w) < 5e-4; };
  Complex const p1(0.461, 0.650);
  Complex const p2(0.451, 0.553);
  bool const pair81 = (near(c.pair.first, p1) && near(c.pair.second, p2)) ||
                      (near(c.pair.first, p2) && near(c.pair.second, p1));
  WilkinsonOptions opts;
  opts.exhaustive = true;
  opts.compute_perturbation = false;
  auto const r = wilkinson_distance(test::example82(), opts);
  bool const miss82 = r.heuristic_epsilon && *r.heuristic_epsilon > r.epsilon_bar_estimate;
  auto cs = [](Complex z) { return num(z.real()) + (z.imag() < 0 ? "" : "+") + num(z.imag()) + "i"; };
  report(6, pair81 && miss82,
         "8.1 pair={" + cs(c.pair.first) + ", " + cs(c.pair.second) + "}; 8.2 heuristic eps=" +
             num(r.heuristic_epsilon.value_or(0)) + " exhaustive eps=" + num(r.epsilon_bar_estimate) + " pair={" +
             cs(r.chosen_pair.first) + ", " + cs(r.chosen_pair.second) + "}");
}

void criterion7() {
  auto const p = *find_problem("perturbed-quadratic");
  std::vector<std::pair<Point, Point>> const starts{{test::pt(0.3, -0.8), test::pt(-0.2, 0.9)},
                                                    {test::pt(0.2, -1.0), test::pt(-0.2, 1.0)},
                                                    {test::pt(-0.4, -0.9), test::pt(0.5, 1.1)},
                                                    {p.a, p.b}};
  bool ok = true;
  int checked = 0;
  for (auto const& [a, b] : starts) {
    LocalOptions opts;
    opts.point_tol = 1e-13;
    auto const r = run_local(p.field, p.region, a, b, opts);
    for (std::size_t i = 1; i < r.records.size(); ++i) {
      if (!r.records[i].x_next) {
        continue;
      }
      ok = ok && (r.records[i].x_reached_z || r.records[i].y_reached_z);
      ++checked;
    }
  }
  report(7, ok && checked > 0, "iterations after the first checked=" + std::to_string(checked));
}

void criterion8() {
  bool ok = true;
  int converged = 0;
  int constrained = 0;
  double worst = 0;
  double min_kappa = std::numeric_limits<double>::infinity();
  std::string detail;
  auto check = [&](const TestProblem& p, const Point& x, const Point& y, double level) {
    ClosestPair cp;
    try {
      cp = refine_closest_pair(p.field, p.region, x, y, level);
    } catch (const std::exception&) {
      return;
    }
    if (cp.connected || cp.sweeps >= ClosestPairOptions{}.max_sweeps) {
      return;
    }
    if (cp.on_boundary) {
      ++constrained;
      return;
    }
    auto const rep = check_pair_optimality(p.field, cp.x, cp.y, level);
    ++converged;
    worst = std::max(worst, rep.relative_residual());
    min_kappa = std::min({min_kappa, rep.kappa1, rep.kappa2});
    bool const good = rep.relative_residual() <= 1e-5 && rep.kappa1 >= 0 && rep.kappa2 >= 0;
    if (!good) {
      detail += "; " + p.name + " residual=" + num(rep.relative_residual());
    }
    ok = ok && good;
  };
  for (auto const& p : builtin_problems()) {
    if (p.name.rfind("sqrt-cusp", 0) == 0 || p.name == "plateau") {
      continue;
    }
    check(p, p.a, p.b, std::max(p.field(p.a), p.field(p.b)));
    LocalOptions opts;
    opts.do_step_1a = true;
    try {
      auto const r = run_local(p.field, p.region, p.a, p.b, opts);
      for (auto const& rec : r.records) {
        if (rec.dist > 1e-6) {
          check(p, rec.x, rec.y, std::max(rec.f_x, rec.f_y));
        }
      }
    } catch (const std::exception&) {
    }
  }
  report(8, ok && converged > 0,
         "converged refinements=" + std::to_string(converged) + " max relative residual=" + num(worst) +
             " min kappa=" + num(min_kappa) + " (pairs held by the region boundary skipped=" +
             std::to_string(constrained) + ")" + detail);
}

void criterion9() {
  auto const r = wilkinson_distance(test::diag({0, 2}));
  double const de = std::abs(r.epsilon_bar_estimate - 1);
  double const dz = std::abs(r.coalescence_point - Complex(1, 0));
  report(9, de <= 1e-9 && dz <= 1e-9, "eps_bar=" + num(r.epsilon_bar_estimate) + " |z-1|=" + num(dz));
}

void criterion10() {
  std::string const m81 = test::data_path("example81.txt");
  std::string const m82 = test::data_path("example82.json");
  std::vector<std::string> const cmds{
      "list-problems",
      "solve-local --problem perturbed-quadratic",
      "solve-local --problem double-well-curve --step1a --format json",
      "solve-local --matrix " + m81,
      "solve-bisect --problem double-well-curve",
      "solve-bisect --problem sqrt-cusp-2d --format json",
      "wilkinson --matrix " + m81,
      "wilkinson --matrix " + m82 + " --exhaustive --threads 4",
      "psgrid --matrix " + m81 + " --grid 30 25 --threads 3",
  };
  int same = 0;
  std::string bad;
  for (auto const& c : cmds) {
    auto const a = cli(c);
    auto const b = cli(c);
    if (a.code == b.code && a.out == b.out && !a.out.empty()) {
      ++same;
    } else {
      bad += "; differs: " + c;
    }
  }
  report(10, same == static_cast<int>(cmds.size()),
         std::to_string(same) + "/" + std::to_string(cmds.size()) + " commands byte-identical" + bad);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  criterion10();
  std::cout << (10 - failures) << "/10 criteria met" << std::endl;
  report_file << (10 - failures) << "/10 criteria met" << std::endl;
  return 0;
}
