#include <doctest.h>

#include <sstream>

#include "modquad/errors.hpp"
#include "modquad/experiments.hpp"
#include "modquad/io.hpp"
#include "modquad/quadratic.hpp"
#include "modquad/rigidity.hpp"
#include "oracles.hpp"

using namespace modquad;

namespace {

QuadPoly f10() {
  QuadPoly f(Modulus::of(6), 10);
  for (std::size_t i = 0; i < 10; ++i) f.set_linear(i, 1);
  for (std::size_t i = 0; i < 5; ++i) f.set_quad(i, 9 - i, 5);
  return f;
}

QuadPoly sum_squared(std::int64_t m, std::size_t k) {
  ExtendedQuadPoly e{Modulus::of(m), k, 0, std::vector<std::int64_t>(k, 0), {}};
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) e.terms.push_back({i, j, 1});
  return fold_boolean(e);
}

}  // namespace

TEST_CASE("evaluation of the ten-variable OR polynomial") {
  const QuadPoly f = f10();
  std::vector<std::uint8_t> x(10, 0);
  CHECK(f.evaluate(x) == 0);
  std::fill(x.begin(), x.end(), 1);
  CHECK(f.evaluate(x) == 5);
  std::fill(x.begin(), x.end(), 0);
  x[0] = 1;
  CHECK(f.evaluate(x) == 1);
  CHECK(f.evaluate_bits(1) == 1);
  CHECK_THROWS_AS((void)f.evaluate(std::vector<std::uint8_t>(9, 0)), PreconditionError);
}

TEST_CASE("evaluate_bits agrees with direct summation") {
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const QuadPoly f = random_quadratic(rng, Modulus::of(2 + static_cast<std::int64_t>(rng.below(20))), 1 + rng.below(9));
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << f.n()); ++x) {
      CHECK(f.evaluate_bits(x) == oracle::eval(f, x));
      std::vector<std::uint8_t> v(f.n());
      for (std::size_t i = 0; i < f.n(); ++i) v[i] = (x >> i) & 1;
      CHECK(f.evaluate(v) == oracle::eval(f, x));
    }
  }
}

TEST_CASE("folding squares into linear terms") {
  ExtendedQuadPoly e{Modulus::of(3), 1, 0, {1}, {{0, 0, 1}}};
  const QuadPoly f = fold_boolean(e);
  CHECK(f.linear(0) == 2);
  CHECK_FALSE(f.has_quadratic_part());

  const QuadPoly s = sum_squared(5, 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(s.linear(i) == 1);
  CHECK(s.quad(0, 1) == 2);
  CHECK(s.quad(0, 2) == 2);
  CHECK(s.quad(1, 2) == 2);

  // Idempotence: folding an already canonical polynomial changes nothing.
  const QuadPoly g = f10();
  ExtendedQuadPoly again{g.modulus(), g.n(), g.constant(), {g.linear().begin(), g.linear().end()}, g.quad_terms()};
  CHECK(fold_boolean(again) == g);
}

TEST_CASE("folding preserves values on the cube") {
  Rng rng(2);
  for (int t = 0; t < 100; ++t) {
    const std::int64_t m = 2 + static_cast<std::int64_t>(rng.below(11));
    const std::size_t n = 1 + rng.below(6);
    ExtendedQuadPoly e{Modulus::of(m), n, static_cast<std::int64_t>(rng.below(50)), {}, {}};
    for (std::size_t i = 0; i < n; ++i) e.linear.push_back(static_cast<std::int64_t>(rng.below(40)) - 20);
    for (int k = 0; k < 8; ++k)
      e.terms.push_back({rng.below(n), rng.below(n), static_cast<Residue>(rng.below(40)) - 20});
    const QuadPoly f = fold_boolean(e);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      std::int64_t s = e.c;
      for (std::size_t i = 0; i < n; ++i)
        if ((x >> i) & 1) s += e.linear[i];
      for (const auto& term : e.terms)
        if (((x >> term.i) & 1) && ((x >> term.j) & 1)) s += term.coef;
      CHECK(f.evaluate_bits(x) == oracle::mod(s, m));
    }
  }
}

TEST_CASE("associated matrix examples") {
  QuadPoly f(Modulus::of(5), 2);
  f.set_quad(0, 1, 2);
  const auto a = assoc_matrix(f);
  CHECK_FALSE(a.doubled);
  CHECK(a.A.entries() == std::vector<Residue>{0, 1, 1, 0});

  QuadPoly g(Modulus::of(4), 2);
  g.set_quad(0, 1, 1);
  const auto b = assoc_matrix(g);
  CHECK(b.doubled);
  CHECK(b.effective_modulus.value() == 8);
  CHECK(b.A.entries() == std::vector<Residue>{0, 1, 1, 0});
}

TEST_CASE("associated matrix reproduces f - f(0) on the cube") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const std::int64_t m = 2 + static_cast<std::int64_t>(rng.below(11));
    const QuadPoly f = random_quadratic(rng, Modulus::of(m), 1 + rng.below(8));
    const auto a = assoc_matrix(f);
    CHECK(a.A.is_symmetric());
    const std::int64_t em = a.effective_modulus.value();
    CHECK(em == (a.doubled ? 2 * m : m));
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << f.n()); ++x) {
      std::int64_t q = 0;
      for (std::size_t i = 0; i < f.n(); ++i)
        for (std::size_t j = 0; j < f.n(); ++j)
          if (((x >> i) & 1) && ((x >> j) & 1)) q += a.A(i, j);
      const std::int64_t expect = (a.doubled ? 2 : 1) * (f.evaluate_bits(x) - f.constant());
      CHECK(oracle::mod(q, em) == oracle::mod(expect, em));
    }
  }
}

TEST_CASE("form rank examples") {
  QuadPoly f(Modulus::of(3), 2);
  f.set_linear(0, 1);
  f.set_linear(1, 1);
  CHECK(form_rank(f) == 2);

  QuadPoly g(Modulus::of(8), 2);
  g.set_linear(0, 4);
  g.set_linear(1, 2);
  CHECK(form_rank(g) == 2);

  QuadPoly odd(Modulus::of(4), 2);
  odd.set_quad(0, 1, 1);
  CHECK_THROWS_AS(form_rank(odd), PreconditionError);
  CHECK_THROWS_AS(form_rank(QuadPoly(Modulus::of(6), 2)), PreconditionError);
}

namespace {

/// Every form a x1^2 + b x2^2 + c x1 x2 (and a x1^2 for n = 1) with
/// coefficients drawn from `coeffs`, over Z_m.
std::vector<QuadPoly> small_forms(std::int64_t m, const std::vector<Residue>& coeffs) {
  std::vector<QuadPoly> out;
  for (auto a : coeffs) {
    QuadPoly f(Modulus::of(m), 1);
    f.set_linear(0, a);
    out.push_back(f);
  }
  for (auto a : coeffs)
    for (auto b : coeffs)
      for (auto c : coeffs) {
        QuadPoly f(Modulus::of(m), 2);
        f.set_linear(0, a);
        f.set_linear(1, b);
        f.set_quad(0, 1, c);
        out.push_back(f);
      }
  return out;
}

std::vector<Residue> all_residues(std::int64_t m) {
  std::vector<Residue> v(static_cast<std::size_t>(m));
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace

TEST_CASE("form rank matches the brute-force rank for odd prime powers") {
  for (std::int64_t m : {3, 9}) {
    for (const auto& f : small_forms(m, all_residues(m))) {
      INFO(format_poly(f));
      CHECK(form_rank(f) == oracle::form_rank_brute(f));
    }
  }
}

TEST_CASE("form rank over Z_4 and doubled Z_2 forms: an upper bound, not always exact") {
  // The doubled mod-2 forms are exactly the even forms mod 4.
  std::size_t mismatches = 0, total = 0;
  for (const auto& base : small_forms(2, {0, 1})) {
    const QuadPoly f = base.doubled();
    CHECK(f.modulus().value() == 4);
    const auto fast = form_rank(f);
    const auto brute = oracle::form_rank_brute(f);
    CHECK(brute <= fast);
    mismatches += brute != fast;
    ++total;
  }
  for (const auto& f : small_forms(4, {0, 2})) {
    CHECK(oracle::form_rank_brute(f) <= form_rank(f));
  }
  MESSAGE("rank(A_f) differs from the rank of f on " << mismatches << " of " << total << " doubled forms");

  // 2 x1^2 + 2 x2^2 = 2 (x1 + x2)^2 mod 4 depends on one linear form only.
  QuadPoly c(Modulus::of(4), 2);
  c.set_linear(0, 2);
  c.set_linear(1, 2);
  CHECK(form_rank(c) == 2);
  CHECK(oracle::form_rank_brute(c) == 1);
  CHECK(mismatches > 0);
}

TEST_CASE("boolean rank bound examples") {
  const QuadPoly s = sum_squared(3, 4);
  const auto b = brank_upper(s);
  CHECK(b.upper == 2);
  CHECK(b.lower == 1);
  CHECK(b.exact_minimum);
  CHECK(brank_exact_tiny(s).rank == 1);

  QuadPoly lin(Modulus::of(3), 4);
  for (std::size_t i = 0; i < 4; ++i) lin.set_linear(i, 1 + i % 2);
  CHECK(brank_upper(lin).upper == 1);

  QuadPoly constant(Modulus::of(4), 3);
  constant.set_constant(3);
  CHECK(brank_exact_tiny(constant).rank == 0);
  CHECK(brank_upper(constant).lower == 0);

  QuadPoly xy(Modulus::of(3), 2);
  xy.set_quad(0, 1, 1);
  const auto w = brank_exact_tiny(xy);
  // x1 x2 = [x1 + x2 = 2], so the single form x1 + x2 suffices.
  CHECK(w.rank == oracle::brank_brute(xy));
  CHECK(w.rank == 1);

  CHECK_THROWS_AS(brank_exact_tiny(QuadPoly(Modulus::of(5), 2)), BudgetExceeded);
  CHECK_THROWS_AS(brank_exact_tiny(QuadPoly(Modulus::of(3), 5)), BudgetExceeded);
}

TEST_CASE("boolean rank bound satisfies its invariants") {
  Rng rng(4);
  for (int t = 0; t < 60; ++t) {
    const std::int64_t m = std::vector<std::int64_t>{2, 3, 4, 5, 8, 9}[rng.below(6)];
    const QuadPoly f = random_quadratic(rng, Modulus::of(m), 1 + rng.below(5));
    const auto b = brank_upper(f);
    const auto a = assoc_matrix(f);
    CHECK(b.lower <= b.upper);
    CHECK(b.upper == 1 + rank(a.A.plus_diagonal(b.witness_diagonal)));
    CHECK(b.doubled == a.doubled);
  }
}

TEST_CASE("exact boolean rank: witnesses, brute force and the sandwich") {
  Rng rng(5);
  for (int t = 0; t < 120; ++t) {
    const std::int64_t m = 2 + static_cast<std::int64_t>(rng.below(3));
    const std::size_t n = 1 + rng.below(4);
    const QuadPoly f = random_quadratic(rng, Modulus::of(m), n);
    const auto w = brank_exact_tiny(f);
    REQUIRE(w.forms.size() == w.rank);
    // The forms determine f on the cube.
    std::map<std::vector<Residue>, Residue> table;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      std::vector<Residue> key;
      for (const auto& v : w.forms) {
        std::int64_t s = 0;
        for (std::size_t i = 0; i < n; ++i)
          if ((x >> i) & 1) s += v[i];
        key.push_back(oracle::mod(s, m));
      }
      auto [it, inserted] = table.emplace(key, f.evaluate_bits(x));
      CHECK(it->second == f.evaluate_bits(x));
    }
    if (n <= 3) CHECK(w.rank == oracle::brank_brute(f));
    const auto b = brank_upper(f);
    if (!b.doubled) {
      CHECK(w.rank <= b.upper);
    } else if (2 * m <= 4) {
      // The bound is about 2f over Z_{2m}.
      CHECK(brank_exact_tiny(f.doubled()).rank <= b.upper);
    }
  }
}

TEST_CASE("doubling can lower the boolean rank") {
  // f = x1 + x3 + x2 x3 mod 2 needs three forms over Z_2, while 2f mod 4
  // is a function of the single form 2 x1 + x2 + 3 x3 mod 4.
  QuadPoly f(Modulus::of(2), 3);
  f.set_linear(0, 1);
  f.set_linear(2, 1);
  f.set_quad(1, 2, 1);
  CHECK(brank_exact_tiny(f).rank == 3);
  CHECK(oracle::brank_brute(f) == 3);
  CHECK(brank_exact_tiny(f.doubled()).rank == 1);
  CHECK(oracle::brank_brute(f.doubled()) == 1);
  const auto b = brank_upper(f);
  CHECK(b.doubled);
  CHECK(b.upper < 3);
}

TEST_CASE("doubled mod-2 bound matches an independent diagonal search") {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    QuadPoly f = random_quadratic(rng, Modulus::of(2), 5);
    f.set_quad(0, 1, 1);  // force an odd quadratic coefficient
    const auto b = brank_upper(f);
    CHECK(b.doubled);
    CHECK(b.effective_modulus == 4);
    CHECK(b.exact_minimum);
    const auto a = assoc_matrix(f).A;
    std::size_t best = 99;
    std::vector<Residue> d(5, 0);
    do best = std::min(best, rank(a.plus_diagonal(d)));
    while (oracle::next_vector(d, 4));
    CHECK(b.upper == 1 + best);
    CHECK(min_diag_rank(a).min_rank == best);
  }
}

TEST_CASE("reduction to a divisor") {
  const QuadPoly r = f10().reduce_mod(2);
  CHECK(r.modulus().value() == 2);
  for (std::size_t i = 0; i < 10; ++i) CHECK(r.linear(i) == 1);
  for (std::size_t i = 0; i < 5; ++i) CHECK(r.quad(i, 9 - i) == 1);
  CHECK(r.quad_terms().size() == 5);
  CHECK(f10().reduce_mod(6) == f10());
  CHECK_THROWS_AS(f10().reduce_mod(4), PreconditionError);

  Rng rng(7);
  for (int t = 0; t < 50; ++t) {
    const QuadPoly f = random_quadratic(rng, Modulus::of(12), 1 + rng.below(7));
    for (std::int64_t d : {2, 3, 4, 6}) {
      const QuadPoly g = f.reduce_mod(d);
      for (std::uint64_t x = 0; x < (std::uint64_t{1} << f.n()); ++x) CHECK(g.evaluate_bits(x) == f.evaluate_bits(x) % d);
    }
  }
}

TEST_CASE("doubling and scaling") {
  Rng rng(8);
  for (int t = 0; t < 30; ++t) {
    const QuadPoly f = random_quadratic(rng, Modulus::of(6), 1 + rng.below(6));
    const QuadPoly d = f.doubled();
    const QuadPoly s = f.scaled(5);
    CHECK(d.modulus().value() == 12);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << f.n()); ++x) {
      CHECK(d.evaluate_bits(x) == 2 * f.evaluate_bits(x));
      CHECK(s.evaluate_bits(x) == 5 * f.evaluate_bits(x) % 6);
    }
  }
}
