#include <CLI11.hpp>
#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mpass/mpass.hpp"

namespace {

using nlohmann::json;

enum ExitCode { ok = 0, input_error = 1, not_converged = 2, numerical_failure = 3 };

struct RunConfig {
  std::string subcommand;
  std::string problem;
  std::string matrix;
  std::optional<double> tol_point;
  std::optional<double> tol_gap;
  std::optional<int> max_iter;
  bool exhaustive = false;
  bool step1a = false;
  std::string format = "csv";
  std::string out;
  std::vector<int> grid{100, 100};
  std::vector<double> box;
  std::string perturbation;
  int threads = 1;
};

struct Output {
  std::string text;
  int code = ok;
};

std::string num(double v) { return fmt::format("{:.17g}", v); }

json complex_json(mpass::Complex z) { return json::array({z.real(), z.imag()}); }

json point_json(const mpass::Point& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

void check_config(const RunConfig& c) {
  if (!c.problem.empty() && !c.matrix.empty()) {
    throw mpass::InvalidArgument("give exactly one of --problem and --matrix");
  }
  if ((c.tol_point && !(*c.tol_point > 0)) || (c.tol_gap && !(*c.tol_gap > 0))) {
    throw mpass::InvalidArgument("tolerances must be positive");
  }
  if (c.max_iter && *c.max_iter < 0) {
    throw mpass::InvalidArgument("--max-iter must be non-negative");
  }
  if (c.threads < 1) {
    throw mpass::InvalidArgument("--threads must be positive");
  }
}

mpass::TestProblem require_problem(const RunConfig& c) {
  auto p = mpass::find_problem(c.problem);
  if (!p) {
    throw mpass::InvalidArgument("unknown problem '" + c.problem + "'");
  }
  return std::move(*p);
}

mpass::LocalOptions local_options(const RunConfig& c) {
  mpass::LocalOptions o;
  o.point_tol = c.tol_point.value_or(o.point_tol);
  o.gap_tol = c.tol_gap.value_or(o.gap_tol);
  o.max_iter = c.max_iter.value_or(o.max_iter);
  o.do_step_1a = c.step1a;
  return o;
}

mpass::WilkinsonOptions wilkinson_options(const RunConfig& c) {
  mpass::WilkinsonOptions o;
  o.local = local_options(c);
  o.exhaustive = c.exhaustive;
  o.threads = c.threads;
  return o;
}

/// Record 0 is the starting pair; the table lists iterations from 1 on unless the run stopped there.
std::size_t first_row(const std::vector<mpass::LocalIterate>& records) { return records.size() > 1 ? 1 : 0; }

std::string local_table(const std::vector<mpass::LocalIterate>& records, mpass::LocalStatus status,
                        const std::string& format) {
  if (format == "json") {
    json rows = json::array();
    for (std::size_t k = first_row(records); k < records.size(); ++k) {
      auto const& r = records[k];
      rows.push_back({{"i", r.index}, {"f_x", r.f_x}, {"M", r.M}, {"gap_ratio", r.gap_ratio}, {"dist", r.dist}});
    }
    return json{{"status", mpass::to_string(status)}, {"rows", rows}}.dump(2) + "\n";
  }
  std::string s = "i,f_x,M,gap_ratio,dist\n";
  for (std::size_t k = first_row(records); k < records.size(); ++k) {
    auto const& r = records[k];
    s += fmt::format("{},{},{},{},{}\n", r.index, num(r.f_x), num(r.M), num(r.gap_ratio), num(r.dist));
  }
  return s;
}

int local_code(mpass::LocalStatus s) { return s == mpass::LocalStatus::converged ? ok : not_converged; }

Output cmd_solve_local(const RunConfig& c) {
  if (!c.matrix.empty()) {
    auto const a = mpass::load_matrix(c.matrix);
    auto opts = wilkinson_options(c);
    opts.compute_perturbation = false;
    auto const r = mpass::wilkinson_distance(a, opts);
    return {local_table(r.records, r.status, c.format), local_code(r.status)};
  }
  auto const p = require_problem(c);
  auto const r = mpass::run_local(p.field, p.region, p.a, p.b, local_options(c));
  return {local_table(r.records, r.status, c.format), local_code(r.status)};
}

Output cmd_solve_bisect(const RunConfig& c) {
  if (!c.matrix.empty()) {
    throw mpass::UnsupportedDimension("solve-bisect works on planar catalog problems only");
  }
  auto const p = require_problem(c);
  if (p.field.dimension() != 2) {
    throw mpass::UnsupportedDimension("solve-bisect: problem '" + p.name + "' is not planar");
  }
  mpass::BisectionOptions o;
  o.value_tol = c.tol_gap.value_or(o.value_tol);
  o.point_tol = c.tol_point.value_or(o.point_tol);
  o.max_iter = c.max_iter.value_or(o.max_iter);
  auto const st = mpass::bisect(p, std::nullopt, std::nullopt, o);

  struct Row {
    int i;
    double lower, upper, dist;
  };
  std::vector<Row> rows{{0, std::max(p.field(p.a), p.field(p.b)), mpass::segment_max(p.field, p.a, p.b).value,
                         (p.a - p.b).norm()}};
  for (std::size_t k = 0; k < st.history.size(); ++k) {
    auto const& h = st.history[k];
    rows.push_back({static_cast<int>(k) + 1, h.lower, h.upper, (h.x - h.y).norm()});
  }
  int const code = st.width() <= o.value_tol || st.pair_distance() <= o.point_tol ? ok : not_converged;

  if (c.format == "json") {
    json jr = json::array();
    for (auto const& r : rows) {
      jr.push_back({{"i", r.i}, {"lower", r.lower}, {"upper", r.upper}, {"dist", r.dist}});
    }
    json j{{"rows", jr},          {"lower", st.lower}, {"upper", st.upper}, {"path_upper", st.path_upper},
           {"x", point_json(st.x)}, {"y", point_json(st.y)}};
    return {j.dump(2) + "\n", code};
  }
  std::string s = "i,lower,upper,dist\n";
  for (auto const& r : rows) {
    s += fmt::format("{},{},{},{}\n", r.i, num(r.lower), num(r.upper), num(r.dist));
  }
  return {s, code};
}

mpass::ComplexMatrix require_matrix(const RunConfig& c) {
  if (c.matrix.empty()) {
    throw mpass::InvalidArgument(c.subcommand + " needs --matrix");
  }
  return mpass::load_matrix(c.matrix);
}

Output cmd_wilkinson(const RunConfig& c, std::optional<std::string>& perturbation_text) {
  auto const a = require_matrix(c);
  auto const r = mpass::wilkinson_distance(a, wilkinson_options(c));
  if (!c.perturbation.empty() && r.perturbation) {
    perturbation_text = mpass::format_matrix_text(*r.perturbation);
  }
  int const code = local_code(r.status);
  if (c.format == "csv") {
    return {local_table(r.records, r.status, "csv"), code};
  }
  json records = json::array();
  for (auto const& it : r.records) {
    records.push_back({{"i", it.index},
                       {"x", point_json(it.x)},
                       {"y", point_json(it.y)},
                       {"z", point_json(it.z)},
                       {"f_x", it.f_x},
                       {"f_z", it.f_z},
                       {"M", it.M},
                       {"gap_ratio", it.gap_ratio},
                       {"dist", it.dist}});
  }
  json j{{"status", mpass::to_string(r.status)},
         {"pair", json::array({complex_json(r.chosen_pair.first), complex_json(r.chosen_pair.second)})},
         {"coalescence_point", complex_json(r.coalescence_point)},
         {"epsilon_bar", r.epsilon_bar_estimate},
         {"records", records},
         {"warnings", r.warnings}};
  if (r.heuristic_pair) {
    j["heuristic_pair"] = json::array({complex_json(r.heuristic_pair->first), complex_json(r.heuristic_pair->second)});
    j["heuristic_epsilon_bar"] = *r.heuristic_epsilon;
  }
  if (r.repeated_eigenvalue) {
    j["repeated_eigenvalue"] = complex_json(*r.repeated_eigenvalue);
  }
  if (c.exhaustive) {
    json runs = json::array();
    for (auto const& run : r.runs) {
      runs.push_back({{"pair", json::array({complex_json(run.pair.first), complex_json(run.pair.second)})},
                      {"status", mpass::to_string(run.status)},
                      {"epsilon_bar", run.epsilon_bar},
                      {"coalescence_point", complex_json(run.coalescence_point)}});
    }
    j["runs"] = runs;
  }
  return {j.dump(2) + "\n", code};
}

Output cmd_psgrid(const RunConfig& c) {
  auto const a = require_matrix(c);
  mpass::ComplexBox box;
  if (c.box.empty()) {
    box = mpass::spectrum_box(a, mpass::eigenvalues(a));
  } else {
    box = {{c.box[0], c.box[1]}, {c.box[2], c.box[3]}};
  }
  auto const g = mpass::pseudospectrum_grid(a, box, c.grid[0], c.grid[1], c.threads);
  if (c.format == "json") {
    json xs = json::array();
    json ys = json::array();
    json sig = json::array();
    for (int j = 0; j < g.ny; ++j) {
      for (int i = 0; i < g.nx; ++i) {
        xs.push_back(g.x(i));
        ys.push_back(g.y(j));
        sig.push_back(g.at(i, j));
      }
    }
    return {json{{"nx", g.nx}, {"ny", g.ny}, {"x", xs}, {"y", ys}, {"sigma", sig}}.dump(2) + "\n", ok};
  }
  std::string s = "x,y,sigma\n";
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      s += fmt::format("{},{},{}\n", num(g.x(i)), num(g.y(j)), num(g.at(i, j)));
    }
  }
  return {s, ok};
}

Output cmd_list_problems(const RunConfig& c) {
  auto const problems = mpass::builtin_problems();
  if (c.format == "json") {
    json arr = json::array();
    for (auto const& p : problems) {
      json e{{"name", p.name}, {"dimension", p.field.dimension()}};
      e["saddle_value"] = p.known_saddle ? json(p.known_saddle->value) : json(nullptr);
      arr.push_back(e);
    }
    return {arr.dump(2) + "\n", ok};
  }
  std::string s = "name,dimension,saddle_value\n";
  for (auto const& p : problems) {
    s += fmt::format("{},{},{}\n", p.name, p.field.dimension(), p.known_saddle ? num(p.known_saddle->value) : "");
  }
  return {s, ok};
}

/// Write via a temporary sibling and rename, so a failed run leaves no partial file.
void write_file(const std::string& path, const std::string& text) {
  std::string const tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw mpass::InvalidArgument("cannot write '" + path + "'");
    }
    out << text;
    if (!out.flush()) {
      std::filesystem::remove(tmp);
      throw mpass::InvalidArgument("cannot write '" + path + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

int run(const RunConfig& c) {
  check_config(c);
  Output out;
  std::optional<std::string> perturbation_text;
  if (c.subcommand == "solve-local") {
    out = cmd_solve_local(c);
  } else if (c.subcommand == "solve-bisect") {
    out = cmd_solve_bisect(c);
  } else if (c.subcommand == "wilkinson") {
    out = cmd_wilkinson(c, perturbation_text);
  } else if (c.subcommand == "psgrid") {
    out = cmd_psgrid(c);
  } else {
    out = cmd_list_problems(c);
  }
  if (perturbation_text) {
    write_file(c.perturbation, *perturbation_text);
  }
  if (c.out.empty()) {
    std::fwrite(out.text.data(), 1, out.text.size(), stdout);
    std::fflush(stdout);
  } else {
    write_file(c.out, out.text);
  }
  if (out.code == not_converged) {
    std::cerr << "not converged\n";
  }
  return out.code;
}

void add_input(CLI::App* sub, RunConfig& c, bool problem, bool matrix) {
  if (problem) {
    sub->add_option("--problem", c.problem, "Catalog problem name");
  }
  if (matrix) {
    sub->add_option("--matrix", c.matrix, "Matrix file (text or JSON)");
  }
}

void add_solver(CLI::App* sub, RunConfig& c) {
  sub->add_option("--tol-point", c.tol_point, "Stop when the pair distance falls below this");
  sub->add_option("--tol-gap", c.tol_gap, "Stop when the bound gap falls below this");
  sub->add_option("--max-iter", c.max_iter, "Iteration limit");
}

void add_output(CLI::App* sub, RunConfig& c) {
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", c.out, "Output file (default: standard output)");
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig c;
  CLI::App app{"Mountain pass saddle points and the distance to the nearest defective matrix"};
  app.require_subcommand(1);

  auto* local = app.add_subcommand("solve-local", "Fast local level set iteration");
  add_input(local, c, true, true);
  add_solver(local, c);
  local->add_flag("--step1a", c.step1a, "Refine to a closest pair before every iteration");
  local->add_flag("--exhaustive", c.exhaustive, "With --matrix, try every eigenvalue pair");
  add_output(local, c);

  auto* bis = app.add_subcommand("solve-bisect", "Level set bisection on a planar problem");
  add_input(bis, c, true, true);
  add_solver(bis, c);
  add_output(bis, c);

  auto* wil = app.add_subcommand("wilkinson", "Distance to the nearest matrix with a repeated eigenvalue");
  add_input(wil, c, true, true);
  add_solver(wil, c);
  wil->add_flag("--exhaustive", c.exhaustive, "Try every eigenvalue pair and keep the smallest value");
  wil->add_flag("--step1a", c.step1a, "Refine to a closest pair before every iteration");
  wil->add_option("--perturbation", c.perturbation, "Write the perturbation matrix to this file");
  wil->add_option("--threads", c.threads, "Worker threads for --exhaustive");
  add_output(wil, c);

  auto* ps = app.add_subcommand("psgrid", "Smallest singular value of A - zI on a grid");
  add_input(ps, c, true, true);
  ps->add_option("--grid", c.grid, "Nodes per axis: NX NY")->expected(2);
  ps->add_option("--box", c.box, "Grid box: X0 Y0 X1 Y1")->expected(4);
  ps->add_option("--threads", c.threads, "Worker threads");
  add_output(ps, c);

  auto* list = app.add_subcommand("list-problems", "List catalog problems");
  add_output(list, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return input_error;
  }
  c.subcommand = app.get_subcommands().front()->get_name();
  if (c.subcommand == "wilkinson" && wil->count("--format") == 0) {
    c.format = "json";
  }
  if (!c.problem.empty() && (c.subcommand == "wilkinson" || c.subcommand == "psgrid")) {
    std::cerr << "error: " << c.subcommand << " takes --matrix, not --problem\n";
    return input_error;
  }

  try {
    return run(c);
  } catch (const mpass::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return input_error;
  } catch (const mpass::UnsupportedDimension& e) {
    std::cerr << "error: unsupported dimension: " << e.what() << "\n";
    return input_error;
  } catch (const mpass::PreconditionViolation& e) {
    std::cerr << "error: " << e.what() << "\n";
    return input_error;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return numerical_failure;
  }
}
