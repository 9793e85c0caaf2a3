#include <doctest.h>

#include "modquad/errors.hpp"
#include "modquad/io.hpp"
#include "modquad/random.hpp"

using namespace modquad;

#ifndef MODQUAD_FIXTURE_DIR
#define MODQUAD_FIXTURE_DIR "tests/fixtures"
#endif

namespace {
const char* const kF10 =
    "x1+x2+x3+x4+x5+x6+x7+x8+x9+x10 + 5*x1*x10+5*x2*x9+5*x3*x8+5*x4*x7+5*x5*x6 mod 6";

std::size_t parse_error_position(const std::string& text) {
  try {
    parse_poly_text(text);
  } catch (const ParseError& e) {
    return e.position();
  }
  FAIL("no ParseError for: " << text);
  return 0;
}
}  // namespace

TEST_CASE("parsing simple polynomials") {
  const QuadPoly f = parse_poly_text("x1 + x2 + x1*x2 mod 2");
  CHECK(f.n() == 2);
  CHECK(f.modulus().value() == 2);
  CHECK(f.linear(0) == 1);
  CHECK(f.linear(1) == 1);
  CHECK(f.quad(0, 1) == 1);
  CHECK(format_poly(f) == "x1 + x2 + x1*x2 mod 2");

  const QuadPoly sq = parse_poly_text("x1*x1 mod 3");
  CHECK(sq.n() == 1);
  CHECK(sq.linear(0) == 1);
  CHECK(sq.quad_terms().empty());

  const QuadPoly neg = parse_poly_text("-x1 + 4 - 2*x2*x1 mod 5", 3);
  CHECK(neg.n() == 3);
  CHECK(neg.linear(0) == 4);
  CHECK(neg.constant() == 4);
  CHECK(neg.quad(0, 1) == 3);
}

TEST_CASE("text and JSON forms of f10 agree") {
  const QuadPoly text = parse_poly_text(kF10);
  const QuadPoly json = parse_poly(std::string(MODQUAD_FIXTURE_DIR) + "/f10.json");
  CHECK(text == json);
  CHECK(parse_poly(to_json(text).dump()) == text);
  CHECK(parse_poly_text(format_poly(text)) == text);
}

TEST_CASE("parse errors carry positions") {
  CHECK(parse_error_position("x1 + x0 mod 2") == 6);
  CHECK(parse_error_position("x1 + + x2 mod 2") == 5);
  CHECK(parse_error_position("x1 + x2") != std::string::npos);
  CHECK_THROWS_AS(parse_poly_text("x1 mod 1"), ParseError);
  CHECK_THROWS_AS(parse_poly_text("x1 + x5 mod 3", 4), ParseError);
  CHECK_THROWS_AS(parse_poly_text("x1*x2*x3 mod 3"), ParseError);
  CHECK_THROWS_AS(parse_poly_text("y1 mod 3"), ParseError);
}

TEST_CASE("JSON round trips") {
  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const std::int64_t m = 2 + static_cast<std::int64_t>(rng.below(20));
    const std::size_t n = 1 + rng.below(8);
    QuadPoly f(Modulus::of(m), n);
    f.set_constant(static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m))));
    for (std::size_t i = 0; i < n; ++i) f.set_linear(i, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m))));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) f.set_quad(i, j, static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(m))));
    CHECK(poly_from_json(to_json(f)) == f);
    CHECK(parse_poly_text(format_poly(f), n) == f);

    ZmMatrix a(Modulus::of(m), 1 + rng.below(4), 1 + rng.below(4));
    for (std::size_t r = 0; r < a.rows(); ++r)
      for (std::size_t c = 0; c < a.cols(); ++c) a(r, c) = static_cast<Residue>(rng.below(static_cast<std::uint64_t>(m)));
    CHECK(matrix_from_json(to_json(a)) == a);
  }
  LinearSystem sys;
  sys.n = 3;
  sys.constraints = {{3, {1, 2, 0}}, {4, {0, 1, 3}}};
  const LinearSystem back = system_from_json(to_json(sys));
  CHECK(back.n == 3);
  REQUIRE(back.constraints.size() == 2);
  CHECK(back.constraints[1].q == 4);
  CHECK(back.constraints[1].v == std::vector<Residue>{0, 1, 3});
}

TEST_CASE("malformed JSON is rejected") {
  CHECK_THROWS_AS(poly_from_json(Json::parse(R"({"m":1,"n":2})")), Error);
  CHECK_THROWS_AS(poly_from_json(Json::parse(R"({"m":3,"n":2,"quad":[[1,3,1]]})")), Error);
  CHECK_THROWS_AS(read_file("/nonexistent/file.json"), PreconditionError);
}
