#pragma once

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "mpass/errors.hpp"
#include "mpass/linalg.hpp"

/**
 * \file matrix_io.hpp
 *
 * @brief Complex matrix files.
 *
 * Text form: a first line holding n, then n rows of n entries written as `re`, `re+imj`, `re-imj` or `imj`, or of
 * 2n plain numbers read as (re, im) pairs. JSON form: {"n": n, "re": [[...]], "im": [[...]]}.
 */

namespace mpass {

namespace detail {

  inline std::optional<double> parse_double(std::string_view s) {
    if (!s.empty() && s.front() == '+') {
      s.remove_prefix(1);
    }
    double v = 0;
    auto const [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      return std::nullopt;
    }
    return v;
  }

  inline bool has_imag_suffix(std::string_view s) { return !s.empty() && (s.back() == 'j' || s.back() == 'i'); }

  /// `re`, `imj`, `re+imj`, `re-imj` (also with an `i` suffix).
  inline std::optional<Complex> parse_complex(std::string_view s) {
    if (!has_imag_suffix(s)) {
      auto re = parse_double(s);
      return re ? std::optional(Complex(*re, 0)) : std::nullopt;
    }
    s.remove_suffix(1);
    std::size_t split = std::string_view::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
      if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
        split = k;
        break;
      }
    }
    if (split == std::string_view::npos) {
      std::string_view im = s;
      if (im == "" || im == "+" || im == "-") {
        return Complex(0, im == "-" ? -1.0 : 1.0);
      }
      auto v = parse_double(im);
      return v ? std::optional(Complex(0, *v)) : std::nullopt;
    }
    auto re = parse_double(s.substr(0, split));
    std::string_view im = s.substr(split);
    std::optional<double> iv = im.size() == 1 ? std::optional(im[0] == '-' ? -1.0 : 1.0) : parse_double(im);
    if (!re || !iv) {
      return std::nullopt;
    }
    return Complex(*re, *iv);
  }

  inline std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream is(line);
    std::vector<std::string> out;
    for (std::string tok; is >> tok;) {
      out.push_back(tok);
    }
    return out;
  }

}  // namespace detail

inline ComplexMatrix parse_matrix_text(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    auto toks = detail::split_ws(line);
    if (!toks.empty()) {
      rows.push_back(std::move(toks));
    }
  }
  if (rows.empty() || rows[0].size() != 1) {
    throw InvalidArgument("matrix file: first line must hold the dimension n");
  }
  auto const nv = detail::parse_double(rows[0][0]);
  if (!nv || *nv < 1 || *nv != std::floor(*nv) || *nv > 100000) {
    throw InvalidArgument("matrix file: invalid dimension");
  }
  auto const n = static_cast<Eigen::Index>(*nv);
  if (static_cast<Eigen::Index>(rows.size()) != n + 1) {
    throw InvalidArgument("matrix file: expected " + std::to_string(n) + " rows");
  }
  ComplexMatrix a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto const& toks = rows[static_cast<std::size_t>(i) + 1];
    bool const any_imag = std::any_of(toks.begin(), toks.end(), [](const std::string& t) {
      return detail::has_imag_suffix(t);
    });
    if (static_cast<Eigen::Index>(toks.size()) == 2 * n && !any_imag) {
      for (Eigen::Index j = 0; j < n; ++j) {
        auto re = detail::parse_double(toks[static_cast<std::size_t>(2 * j)]);
        auto im = detail::parse_double(toks[static_cast<std::size_t>(2 * j + 1)]);
        if (!re || !im) {
          throw InvalidArgument("matrix file: malformed entry in row " + std::to_string(i + 1));
        }
        a(i, j) = Complex(*re, *im);
      }
    } else if (static_cast<Eigen::Index>(toks.size()) == n) {
      for (Eigen::Index j = 0; j < n; ++j) {
        auto z = detail::parse_complex(toks[static_cast<std::size_t>(j)]);
        if (!z) {
          throw InvalidArgument("matrix file: malformed entry '" + toks[static_cast<std::size_t>(j)] + "'");
        }
        a(i, j) = *z;
      }
    } else {
      throw InvalidArgument("matrix file: row " + std::to_string(i + 1) + " has the wrong number of entries");
    }
  }
  if (!a.allFinite()) {
    throw InvalidArgument("matrix file: non-finite entry");
  }
  return a;
}

inline ComplexMatrix parse_matrix_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("matrix file: ") + e.what());
  }
  try {
    auto const n = j.at("n").get<long>();
    if (n < 1) {
      throw InvalidArgument("matrix file: invalid dimension");
    }
    auto const re = j.at("re").get<std::vector<std::vector<double>>>();
    auto const im = j.contains("im") ? j.at("im").get<std::vector<std::vector<double>>>()
                                     : std::vector<std::vector<double>>(static_cast<std::size_t>(n),
                                                                        std::vector<double>(static_cast<std::size_t>(n)));
    auto const un = static_cast<std::size_t>(n);
    if (re.size() != un || im.size() != un) {
      throw InvalidArgument("matrix file: row count differs from n");
    }
    ComplexMatrix a(n, n);
    for (std::size_t i = 0; i < un; ++i) {
      if (re[i].size() != un || im[i].size() != un) {
        throw InvalidArgument("matrix file: column count differs from n");
      }
      for (std::size_t k = 0; k < un; ++k) {
        a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = Complex(re[i][k], im[i][k]);
      }
    }
    if (!a.allFinite()) {
      throw InvalidArgument("matrix file: non-finite entry");
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("matrix file: ") + e.what());
  }
}

/// Text or JSON, told apart by a leading '{'.
inline ComplexMatrix parse_matrix(const std::string& text) {
  auto const first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    return parse_matrix_json(text);
  }
  return parse_matrix_text(text);
}

inline ComplexMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InvalidArgument("cannot open matrix file '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_matrix(ss.str());
}

/// Text form with (re, im) pairs at 17 significant digits.
inline std::string format_matrix_text(const ComplexMatrix& a) {
  std::ostringstream os;
  os << std::setprecision(17) << a.rows() << '\n';
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      os << (j ? " " : "") << a(i, j).real() << ' ' << a(i, j).imag();
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace mpass
