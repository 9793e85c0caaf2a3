#include "modquad/io.hpp"

#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "modquad/errors.hpp"

namespace modquad {

namespace {

struct ParsedTerm {
  std::int64_t coef;
  std::size_t i, j;  // 0 = absent, 1-based otherwise
  std::size_t pos;
};

class PolyParser {
 public:
  explicit PolyParser(std::string_view text) : s_(text) {}

  QuadPoly parse(std::optional<std::size_t> n) {
    std::vector<ParsedTerm> terms;
    skip_ws();
    bool negate = false;
    if (peek() == '-') {
      negate = true;
      ++pos_;
    }
    for (;;) {
      ParsedTerm t = parse_term();
      if (negate) t.coef = -t.coef;
      terms.push_back(t);
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        negate = peek() == '-';
        ++pos_;
        continue;
      }
      break;
    }
    skip_ws();
    if (!match_word("mod")) throw ParseError("expected '+', '-' or 'mod'", pos_);
    skip_ws();
    const std::size_t num_pos = pos_;
    const std::int64_t m = parse_int();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected trailing input", pos_);
    if (m < 2) throw ParseError("modulus must be at least 2", num_pos);

    std::size_t max_index = 0;
    for (const auto& t : terms) max_index = std::max({max_index, t.i, t.j});
    const std::size_t vars = n.value_or(max_index);
    for (const auto& t : terms)
      if (std::max(t.i, t.j) > vars) {
        throw ParseError("variable index " + std::to_string(std::max(t.i, t.j)) + " out of range for n = " +
                             std::to_string(vars),
                         t.pos);
      }
    QuadPoly f(Modulus::of(m), vars);
    for (const auto& t : terms) {
      if (t.i == 0) {
        f.set_constant(f.modulus().add(f.constant(), f.modulus().reduce(t.coef)));
      } else if (t.j == 0) {
        f.add_term(t.i - 1, t.i - 1, t.coef);
      } else {
        f.add_term(t.i - 1, t.j - 1, t.coef);
      }
    }
    return f;
  }

 private:
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool match_word(std::string_view w) {
    if (s_.substr(pos_, w.size()) != w) return false;
    pos_ += w.size();
    return true;
  }

  std::int64_t parse_int() {
    skip_ws();
    const std::size_t start = pos_;
    std::int64_t v = 0;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      v = v * 10 + (s_[pos_] - '0');
      if (v > (std::int64_t{1} << 40)) throw ParseError("number too large", start);
      ++pos_;
    }
    if (pos_ == start) throw ParseError("expected a number", start);
    return v;
  }

  std::size_t parse_variable() {
    skip_ws();
    const std::size_t start = pos_;
    if (peek() != 'x') throw ParseError("expected a variable like x1", start);
    ++pos_;
    const std::size_t idx_pos = pos_;
    const std::int64_t idx = parse_int();
    if (idx < 1) throw ParseError("variable indices start at 1", idx_pos);
    return static_cast<std::size_t>(idx);
  }

  ParsedTerm parse_term() {
    skip_ws();
    ParsedTerm t{1, 0, 0, pos_};
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      t.coef = parse_int();
      skip_ws();
      if (peek() != '*') return t;
      ++pos_;
    }
    t.i = parse_variable();
    skip_ws();
    if (peek() == '*') {
      ++pos_;
      t.j = parse_variable();
      skip_ws();
      if (peek() == '*') throw ParseError("terms may have degree at most 2", pos_);
    }
    return t;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

QuadPoly parse_poly_text(std::string_view text, std::optional<std::size_t> n) {
  return PolyParser(text).parse(n);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QuadPoly parse_poly(const std::string& text_or_path, std::optional<std::size_t> n) {
  std::string text = text_or_path;
  std::error_code ec;
  if (text.find("mod") == std::string::npos && text.find('{') == std::string::npos &&
      std::filesystem::is_regular_file(text, ec)) {
    text = read_file(text_or_path);
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid polynomial JSON: ") + e.what(), e.byte == 0 ? 0 : e.byte - 1);
    }
    return poly_from_json(j);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.pop_back();
  return parse_poly_text(text, n);
}

std::string format_poly(const QuadPoly& f) {
  std::ostringstream out;
  bool first = true;
  auto sep = [&]() {
    if (!first) out << " + ";
    first = false;
  };
  if (f.constant() != 0) {
    sep();
    out << f.constant();
  }
  for (std::size_t i = 0; i < f.n(); ++i) {
    if (f.linear(i) == 0) continue;
    sep();
    if (f.linear(i) != 1) out << f.linear(i) << '*';
    out << 'x' << i + 1;
  }
  for (const auto& t : f.quad_terms()) {
    sep();
    if (t.coef != 1) out << t.coef << '*';
    out << 'x' << t.i + 1 << "*x" << t.j + 1;
  }
  if (first) out << '0';
  out << " mod " << f.modulus().value();
  return out.str();
}

Json to_json(const QuadPoly& f) {
  Json quad = Json::array();
  for (const auto& t : f.quad_terms()) quad.push_back({t.i + 1, t.j + 1, t.coef});
  return Json{{"m", f.modulus().value()}, {"n", f.n()}, {"c", f.constant()}, {"linear", f.linear()}, {"quad", quad}};
}

QuadPoly poly_from_json(const Json& j) {
  try {
    const auto m = j.at("m").get<std::int64_t>();
    if (m < 2) throw PreconditionError("modulus must be at least 2");
    const auto n = j.at("n").get<std::size_t>();
    QuadPoly f(Modulus::of(m), n);
    f.set_constant(j.value("c", std::int64_t{0}));
    if (j.contains("linear")) {
      const auto lin = j.at("linear").get<std::vector<std::int64_t>>();
      if (lin.size() != n) throw PreconditionError("\"linear\" must have n entries");
      for (std::size_t i = 0; i < n; ++i) f.set_linear(i, lin[i]);
    }
    if (j.contains("quad")) {
      for (const auto& t : j.at("quad")) {
        const auto i = t.at(0).get<std::size_t>(), k = t.at(1).get<std::size_t>();
        if (i < 1 || k < 1 || i > n || k > n) throw PreconditionError("quadratic term index out of range (1-based)");
        f.add_term(i - 1, k - 1, t.at(2).get<std::int64_t>());
      }
    }
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed polynomial JSON: ") + e.what());
  }
}

Json to_json(const ZmMatrix& a) {
  return Json{{"m", a.modulus().value()}, {"rows", a.rows()}, {"cols", a.cols()}, {"entries", a.entries()}};
}

ZmMatrix matrix_from_json(const Json& j) {
  try {
    const auto m = j.at("m").get<std::int64_t>();
    if (m < 2) throw PreconditionError("modulus must be at least 2");
    const auto entries = j.at("entries").get<std::vector<std::int64_t>>();
    return ZmMatrix(Modulus::of(m), j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(), entries);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed matrix JSON: ") + e.what());
  }
}

Json to_json(const GroupShape& s) { return Json{{"factors", s.factors}, {"rank", s.rank()}}; }

Json to_json(const SmithDecomposition& d) {
  return Json{{"P", to_json(d.P)}, {"Q", to_json(d.Q)}, {"D", to_json(d.D)}, {"diagonal_gcds", d.diagonal_gcds()}};
}

Json to_json(const ResidueHistogram& h) {
  return Json{{"m", h.modulus}, {"n", h.n}, {"counts", h.counts}};
}

Json to_json(const OffDiagonalBlock& b) {
  return Json{{"rows", b.rows}, {"cols", b.cols}, {"rank", b.rank()}, {"shape", b.shape.factors},
              {"exhaustive", b.exhaustive}};
}

Json to_json(const RigidityReport& r) {
  return Json{{"min_rank", r.min_rank},
              {"witness_diagonal", r.witness_diagonal},
              {"exact", r.exact},
              {"offdiag_rank", r.offdiag_rank},
              {"offdiag_block", to_json(r.offdiag_block)},
              {"search_space", r.search_space}};
}

Json to_json(const BooleanRankBound& b) {
  return Json{{"lower", b.lower},
              {"upper", b.upper},
              {"witness_diagonal", b.witness_diagonal},
              {"exact_minimum", b.exact_minimum},
              {"doubled", b.doubled},
              {"effective_modulus", b.effective_modulus}};
}

Json to_json(const DavenportResult& d) {
  return Json{{"value", d.value}, {"witness", d.witness}, {"method", d.method}, {"states", d.states}};
}

Json to_json(const SolutionBoundsReport& r) {
  Json j{{"count", r.count},
         {"n", r.n},
         {"r", r.r},
         {"m", r.m},
         {"rank_bound", r.rank_bound},
         {"rank_bound_holds", r.rank_bound_holds},
         {"two_solution_threshold", r.two_solution_threshold},
         {"two_solutions_required", r.two_solutions_required},
         {"two_solutions_hold", r.two_solutions_hold},
         {"davenport_method", r.davenport_method},
         {"ball_bound", r.ball_bound},
         {"log_ball_bound", r.log_ball_bound},
         {"ball_bound_holds", r.ball_bound_holds},
         {"covering_holds", r.covering_holds}};
  j["davenport"] = r.davenport ? Json(*r.davenport) : Json(nullptr);
  j["covering_radius"] = r.covering_radius ? Json(*r.covering_radius) : Json(nullptr);
  return j;
}

Json to_json(const LinearSystem& s) {
  Json cons = Json::array();
  for (const auto& c : s.constraints) cons.push_back({{"q", c.q}, {"v", c.v}});
  return Json{{"n", s.n}, {"constraints", cons}};
}

LinearSystem system_from_json(const Json& j) {
  try {
    LinearSystem s;
    s.n = j.at("n").get<std::size_t>();
    for (const auto& c : j.at("constraints")) {
      LinearConstraint lc;
      lc.q = c.at("q").get<std::int64_t>();
      lc.v = c.at("v").get<std::vector<Residue>>();
      s.constraints.push_back(std::move(lc));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed linear system JSON: ") + e.what());
  }
}

Json to_json(const MvfFamily& fam) {
  Json basis = Json::array();
  for (const auto& [a, b] : fam.basis) basis.push_back({a, b});
  return Json{{"m", fam.modulus},      {"dim", fam.dim},           {"basis", basis},   {"S", fam.S},
              {"T", fam.T},            {"s_points", fam.s_points}, {"t_points", fam.t_points}};
}

Json to_json(const CliqueResult& c) {
  return Json{{"size", c.size}, {"upper", c.upper}, {"exact", c.exact}, {"clique", c.clique}};
}

}  // namespace modquad
