#include <doctest.h>

#include "modquad/errors.hpp"
#include "modquad/experiments.hpp"
#include "modquad/random.hpp"
#include "modquad/zmod_linalg.hpp"
#include "oracles.hpp"

using namespace modquad;

namespace {

ZmMatrix mat(std::int64_t m, std::size_t r, std::size_t c, std::vector<Residue> e) {
  return ZmMatrix(Modulus::of(m), r, c, std::move(e));
}

bool is_diagonal(const ZmMatrix& d) {
  for (std::size_t i = 0; i < d.rows(); ++i)
    for (std::size_t j = 0; j < d.cols(); ++j)
      if (i != j && d(i, j) != 0) return false;
  return true;
}

bool divisibility_chain(const std::vector<std::int64_t>& g) {
  for (std::size_t i = 1; i < g.size(); ++i)
    if (g[i] % g[i - 1] != 0) return false;
  return true;
}

void check_smith(const ZmMatrix& a) {
  const auto s = smith_normal_form(a);
  CHECK(s.P * a * s.Q == s.D);
  CHECK(is_diagonal(s.D));
  CHECK(s.P.is_invertible());
  CHECK(s.Q.is_invertible());
  CHECK(divisibility_chain(s.diagonal_gcds()));
}

}  // namespace

TEST_CASE("smith form examples") {
  const auto a = mat(6, 2, 2, {3, 0, 0, 1});
  check_smith(a);
  CHECK(smith_normal_form(a).diagonal_gcds() == std::vector<std::int64_t>{1, 3});

  const auto b = mat(8, 2, 2, {4, 0, 2, 2});
  check_smith(b);
  CHECK(smith_normal_form(b).diagonal_gcds() == std::vector<std::int64_t>{2, 4});
}

TEST_CASE("smith reconstruction on random 5x7 matrices over Z_12") {
  Rng rng(7);
  const Modulus m = Modulus::of(12);
  for (int t = 0; t < 500; ++t) check_smith(random_matrix(rng, m, 5, 7));
}

TEST_CASE("smith reconstruction on assorted shapes and moduli") {
  Rng rng(11);
  for (std::int64_t mv : {2, 4, 6, 8, 9, 12, 30, 49}) {
    const Modulus m = Modulus::of(mv);
    for (int t = 0; t < 60; ++t) {
      const std::size_t r = rng.below(6), c = rng.below(6);
      check_smith(random_matrix(rng, m, r, c));
    }
  }
}

TEST_CASE("group shape examples") {
  CHECK(group_shape(ZmMatrix::identity(Modulus::of(6), 3)).factors == std::vector<std::int64_t>{6, 6, 6});
  const auto b = mat(8, 2, 2, {4, 0, 2, 2});
  CHECK(group_shape(b).factors == std::vector<std::int64_t>{2, 4});
  CHECK(rank(b) == 2);
  const auto c = mat(4, 2, 2, {2, 2, 2, 2});
  CHECK(group_shape(c).factors == std::vector<std::int64_t>{2});
  CHECK(oracle::closure(oracle::columns(c), 4, 2).size() == 2);
  CHECK(group_shape(ZmMatrix(Modulus::of(5), 3, 4)).factors.empty());
}

TEST_CASE("group shape agrees with subgroup enumeration") {
  Rng rng(3);
  for (std::int64_t mv : {4, 6, 8, 9, 12}) {
    const Modulus m = Modulus::of(mv);
    for (int t = 0; t < 40; ++t) {
      const std::size_t r = 1 + rng.below(3), c = 1 + rng.below(4);
      const ZmMatrix a = random_matrix(rng, m, r, c);
      const auto col = group_shape(a, Side::Column);
      const auto row = group_shape(a, Side::Row);
      CHECK(col == row);
      const auto col_group = oracle::closure(oracle::columns(a), mv, r);
      const auto row_group = oracle::closure(oracle::rows(a), mv, c);
      CHECK(oracle::kernel_profile(col_group, mv) == oracle::shape_profile(col.factors, mv));
      CHECK(oracle::kernel_profile(row_group, mv) == oracle::shape_profile(row.factors, mv));
      for (auto d : col.factors) CHECK(mv % d == 0);
      CHECK(divisibility_chain(col.factors));
    }
  }
}

TEST_CASE("left nullspace examples") {
  const auto ns = left_nullspace(mat(4, 1, 1, {2}));
  REQUIRE(ns.rows() >= 1);
  CHECK(oracle::closure(oracle::rows(ns), 4, 1) == std::vector<std::vector<Residue>>{{0}, {2}});
  CHECK(oracle::closure(oracle::rows(left_nullspace(ZmMatrix::identity(Modulus::of(6), 3))), 6, 3).size() == 1);
}

TEST_CASE("left nullspace equals full enumeration over Z_9") {
  Rng rng(5);
  const Modulus m = Modulus::of(9);
  for (int t = 0; t < 20; ++t) {
    const ZmMatrix a = random_matrix(rng, m, 4, 4);
    const auto ns = left_nullspace_with_orders(a);
    for (std::size_t i = 0; i < ns.generators.rows(); ++i) {
      const auto prod = a.left_multiply(ns.generators.row(i));
      CHECK(std::all_of(prod.begin(), prod.end(), [](Residue x) { return x == 0; }));
    }
    std::set<std::vector<Residue>> truth;
    std::vector<Residue> v(4, 0);
    do {
      const auto p = a.left_multiply(v);
      if (std::all_of(p.begin(), p.end(), [](Residue x) { return x == 0; })) truth.insert(v);
    } while (oracle::next_vector(v, 9));
    const auto gen = oracle::closure(oracle::rows(ns.generators), 9, 4);
    CHECK(std::set<std::vector<Residue>>(gen.begin(), gen.end()) == truth);
    std::uint64_t order = 1;
    for (auto o : ns.orders) order *= static_cast<std::uint64_t>(o);
    CHECK(order == truth.size());
  }
}

TEST_CASE("solve_left finds solutions exactly when they exist") {
  Rng rng(19);
  for (std::int64_t mv : {4, 6, 8, 12}) {
    const Modulus m = Modulus::of(mv);
    for (int t = 0; t < 30; ++t) {
      const ZmMatrix a = random_matrix(rng, m, 3, 2);
      const auto rowspace = oracle::closure(oracle::rows(a), mv, 2);
      std::vector<Residue> b(2, 0);
      do {
        const bool in_span = std::binary_search(rowspace.begin(), rowspace.end(), b);
        const auto x = solve_left(a, b);
        CHECK(x.has_value() == in_span);
        if (x) CHECK(a.left_multiply(*x) == b);
        const auto lex = solve_left_lex_least(a, b);
        CHECK(lex.has_value() == in_span);
        if (lex) {
          CHECK(a.left_multiply(*lex) == b);
          // No lexicographically smaller solution exists.
          std::vector<Residue> y(3, 0);
          do {
            if (a.left_multiply(y) == b) CHECK(y >= *lex);
          } while (oracle::next_vector(y, mv));
        }
      } while (oracle::next_vector(b, mv));
    }
  }
}

TEST_CASE("full rank submatrix examples") {
  const auto [i1, i2] = full_rank_submatrix(ZmMatrix::identity(Modulus::of(4), 3));
  CHECK(i1 == std::vector<std::size_t>{0, 1, 2});
  CHECK(i2 == std::vector<std::size_t>{0, 1, 2});
  const auto [j1, j2] = full_rank_submatrix(mat(2, 2, 2, {1, 1, 1, 1}));
  CHECK(j1 == std::vector<std::size_t>{0});
  CHECK(j2 == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(full_rank_submatrix(mat(6, 1, 1, {1})), PreconditionError);
}

TEST_CASE("full rank submatrix keeps the shape of 6x6 matrices over Z_8") {
  Rng rng(23);
  const Modulus m = Modulus::of(8);
  for (int t = 0; t < 200; ++t) {
    const ZmMatrix a = random_matrix(rng, m, 6, 6);
    const auto [r1, r2] = full_rank_submatrix(a);
    const auto shape = group_shape(a);
    CHECK(r1.size() == shape.rank());
    CHECK(r2.size() == shape.rank());
    CHECK(group_shape(a.submatrix(r1, r2)) == shape);
    CHECK(group_shape(a.select_rows(r1)) == shape);
  }
}

TEST_CASE("no submatrix of the same size beats the extracted one") {
  Rng rng(29);
  for (std::int64_t mv : {2, 4, 8, 9}) {
    const Modulus m = Modulus::of(mv);
    for (int t = 0; t < 25; ++t) {
      const std::size_t r = 1 + rng.below(5), c = 1 + rng.below(5);
      const ZmMatrix a = random_matrix(rng, m, r, c);
      const auto [i1, i2] = full_rank_submatrix(a);
      const auto best = group_shape(a.submatrix(i1, i2));
      const std::size_t k = i1.size();
      for (std::uint32_t rm = 0; rm < (1u << r); ++rm) {
        if (static_cast<std::size_t>(__builtin_popcount(rm)) != k) continue;
        std::vector<std::size_t> rs;
        for (std::size_t i = 0; i < r; ++i)
          if ((rm >> i) & 1) rs.push_back(i);
        for (std::uint32_t cm = 0; cm < (1u << c); ++cm) {
          if (static_cast<std::size_t>(__builtin_popcount(cm)) != k) continue;
          std::vector<std::size_t> cs;
          for (std::size_t j = 0; j < c; ++j)
            if ((cm >> j) & 1) cs.push_back(j);
          const auto s = group_shape(a.submatrix(rs, cs));
          CHECK(s.rank() <= best.rank());
          if (s.rank() == best.rank()) CHECK(s.order() <= best.order());
        }
      }
    }
  }
}

TEST_CASE("rank is subadditive for prime-power moduli") {
  Rng rng(31);
  for (std::int64_t mv : {2, 3, 4, 8, 9, 25, 27}) {
    const Modulus m = Modulus::of(mv);
    for (int t = 0; t < 50; ++t) {
      const std::size_t r = 1 + rng.below(6), c = 1 + rng.below(6);
      const ZmMatrix a = random_matrix(rng, m, r, c), b = random_matrix(rng, m, r, c);
      CHECK(rank(a + b) <= rank(a) + rank(b));
    }
  }
}

TEST_CASE("rejects malformed matrices") {
  CHECK_THROWS_AS(ZmMatrix(Modulus::of(4), 1, 2, {1}), PreconditionError);
  CHECK_THROWS_AS(ZmMatrix(Modulus::of(4), 1, 1, {4}), PreconditionError);
  const std::vector<std::int64_t> vals{-1, 9};
  CHECK(ZmMatrix::from_integers(Modulus::of(4), 1, 2, vals).entries() == std::vector<Residue>{3, 1});
}
