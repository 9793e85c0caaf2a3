#include <doctest.h>

#include <cmath>

#include "modquad/errors.hpp"
#include "modquad/experiments.hpp"
#include "modquad/rigidity.hpp"
#include "oracles.hpp"

using namespace modquad;

namespace {

ZmMatrix mat(std::int64_t m, std::size_t n, std::vector<Residue> e) { return ZmMatrix(Modulus::of(m), n, n, std::move(e)); }

ZmMatrix all_ones(std::int64_t m, std::size_t n) { return mat(m, n, std::vector<Residue>(n * n, 1)); }

std::size_t brute_min_diag_rank(const ZmMatrix& a) {
  std::size_t best = a.rows();
  std::vector<Residue> d(a.rows(), 0);
  do best = std::min(best, rank(a.plus_diagonal(d)));
  while (oracle::next_vector(d, a.modulus().value()));
  return best;
}

/// Best block over all disjoint (I1, I2): every index goes to I1, I2 or
/// neither.
GroupShape brute_offdiag(const ZmMatrix& a) {
  const std::size_t n = a.rows();
  GroupShape best;
  std::vector<Residue> assign(n, 0);
  do {
    std::vector<std::size_t> r, c;
    for (std::size_t i = 0; i < n; ++i) {
      if (assign[i] == 1) r.push_back(i);
      if (assign[i] == 2) c.push_back(i);
    }
    if (r.empty() || c.empty()) continue;
    const auto s = group_shape(a.submatrix(r, c));
    if (block_better(s, best)) best = s;
  } while (oracle::next_vector(assign, 3));
  return best;
}

ZmMatrix random_full_rank(Rng& rng, const Modulus& m, std::size_t r) {
  for (;;) {
    ZmMatrix a = random_matrix(rng, m, r, r);
    if (rank(a) == r) return a;
  }
}

}  // namespace

TEST_CASE("diagonal matrices have diagonal rigidity zero") {
  const Modulus m = Modulus::of(9);
  const std::vector<Residue> d{3, 0, 7, 1};
  const auto a = ZmMatrix::diagonal(m, d);
  const auto rep = min_diag_rank(a);
  CHECK(rep.min_rank == 0);
  CHECK(rep.exact);
  CHECK(rep.witness_diagonal == std::vector<Residue>{6, 0, 2, 8});
  CHECK(max_offdiag_rank(a).rank() == 0);
}

TEST_CASE("all-ones matrix over Z_2") {
  const auto a = all_ones(2, 4);
  const auto rep = min_diag_rank(a);
  CHECK(rep.min_rank == 1);
  CHECK(rep.exact);
  CHECK(rep.witness_diagonal == std::vector<Residue>{0, 0, 0, 0});
  CHECK(brute_min_diag_rank(a) == 1);
  CHECK(max_offdiag_rank(a).rank() == 1);
}

TEST_CASE("off-diagonal rank of a Z_4 example") {
  const auto a = mat(4, 3, {0, 1, 0, 1, 0, 2, 0, 2, 0});
  const auto b = max_offdiag_rank(a);
  CHECK(b.rank() == 1);
  CHECK(brute_offdiag(a).rank() == 1);
}

TEST_CASE("exhaustive minimum matches brute force and the budgeted search") {
  Rng rng(1);
  for (std::int64_t mv : {2, 3, 4, 5, 8, 9}) {
    const Modulus m = Modulus::of(mv);
    for (int t = 0; t < 15; ++t) {
      const std::size_t n = 1 + rng.below(mv <= 3 ? 6 : 4);
      const auto a = random_symmetric(rng, m, n);
      const auto rep = min_diag_rank(a);
      CHECK(rep.exact);
      CHECK(rep.min_rank == brute_min_diag_rank(a));
      CHECK(rank(a.plus_diagonal(rep.witness_diagonal)) == rep.min_rank);
      CHECK(rep.offdiag_rank <= rep.min_rank);

      RigidityOptions cheap;
      cheap.exact_budget = 1;
      cheap.samples = 20;
      const auto h = min_diag_rank(a, cheap);
      CHECK(h.min_rank >= rep.min_rank);
      CHECK(rank(a.plus_diagonal(h.witness_diagonal)) == h.min_rank);
      if (h.exact) CHECK(h.min_rank == rep.min_rank);
    }
  }
}

TEST_CASE("random symmetric 3x3 over Z_3: exhaustive equals budgeted-exact") {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const auto a = random_symmetric(rng, Modulus::of(3), 3);
    RigidityOptions o;
    o.exact_budget = 27;
    CHECK(min_diag_rank(a, o).min_rank == brute_min_diag_rank(a));
    CHECK(min_diag_rank(a, o).exact);
  }
}

TEST_CASE("exhaustive search is independent of the worker count") {
  Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_symmetric(rng, Modulus::of(5), 6);
    RigidityOptions one, four;
    four.workers = 4;
    const auto r1 = min_diag_rank(a, one), r4 = min_diag_rank(a, four);
    CHECK(r1.min_rank == r4.min_rank);
    CHECK(r1.witness_diagonal == r4.witness_diagonal);
  }
}

TEST_CASE("best off-diagonal block matches all disjoint pairs") {
  Rng rng(4);
  for (std::int64_t mv : {2, 3, 4, 8, 9}) {
    const Modulus m = Modulus::of(mv);
    for (int t = 0; t < 12; ++t) {
      const std::size_t n = 2 + rng.below(5);
      const auto a = random_symmetric(rng, m, n);
      const auto b = max_offdiag_rank(a);
      const auto truth = brute_offdiag(a);
      CHECK(b.exhaustive);
      CHECK(b.shape == truth);
      CHECK(group_shape(a.submatrix(b.rows, b.cols)) == b.shape);
      for (auto i : b.rows) CHECK(std::find(b.cols.begin(), b.cols.end(), i) == b.cols.end());
    }
  }
}

TEST_CASE("low-rank diagonal construction contract") {
  Rng rng(5);
  SUBCASE("all ones") {
    for (std::size_t n : {2, 5, 9}) {
      const auto a = all_ones(2, n);
      const auto c = low_rank_diagonal(a);
      CHECK(c.block.rank() == 1);
      CHECK(rank(a.plus_diagonal(c.diagonal.diagonal)) <= 4);
    }
  }
  SUBCASE("random 8x8 over Z_3") {
    for (int t = 0; t < 20; ++t) {
      const auto a = random_symmetric(rng, Modulus::of(3), 8);
      const auto c = low_rank_diagonal(a);
      const auto s = max_offdiag_rank(a).rank();
      CHECK(c.block.rank() == s);
      const auto r = rank(a.plus_diagonal(c.diagonal.diagonal));
      CHECK(r <= 4 * s);
      CHECK(min_diag_rank(a).min_rank <= r);
    }
  }
  SUBCASE("random 10x10 over Z_4 with even entries") {
    for (int t = 0; t < 10; ++t) {
      const auto a = random_symmetric(rng, Modulus::of(4), 10, true);
      const auto c = low_rank_diagonal(a);
      CHECK(rank(a.plus_diagonal(c.diagonal.diagonal)) <= 4 * max_offdiag_rank(a).rank());
    }
  }
  SUBCASE("zero off-diagonal block") {
    const auto a = ZmMatrix::diagonal(Modulus::of(8), std::vector<Residue>{1, 2, 3});
    const auto c = low_rank_diagonal(a);
    CHECK(rank(a.plus_diagonal(c.diagonal.diagonal)) == 0);
  }
}

TEST_CASE("rigidity preconditions") {
  CHECK_THROWS_AS(min_diag_rank(ZmMatrix(Modulus::of(3), 2, 2, {0, 1, 2, 0})), PreconditionError);
  CHECK_THROWS_AS(min_diag_rank(all_ones(6, 3)), PreconditionError);
}

TEST_CASE("weight tail: identity over Z_2 at t = 0 is exact") {
  for (std::size_t r = 4; r <= 12; ++r) {
    const auto a = ZmMatrix::identity(Modulus::of(2), r);
    const std::vector<Residue> v(r, 0);
    const auto res = weight_tail_experiment(a, v, 0.0);
    CHECK(res.empirical == std::ldexp(1.0, -static_cast<int>(r)));
    CHECK(res.bound == std::ldexp(1.0, -static_cast<int>(r)));
    CHECK(res.hits == 1);
    const auto full = weight_tail_experiment(a, v, 1.0);
    CHECK(full.empirical == 1.0);
    CHECK(full.bound >= 1.0);
  }
}

TEST_CASE("weight tail: exhaustive count matches direct enumeration") {
  Rng rng(6);
  for (std::int64_t mv : {2, 3, 4, 6}) {
    for (int t = 0; t < 10; ++t) {
      const std::size_t rows = 1 + rng.below(6), k = 1 + rng.below(8);
      const auto a = random_matrix(rng, Modulus::of(mv), rows, k);
      std::vector<Residue> v(rows);
      for (auto& x : v) x = static_cast<Residue>(rng.below(static_cast<std::uint64_t>(mv)));
      const double frac = rng.unit();
      const auto res = weight_tail_experiment(a, v, frac);
      const std::size_t r = rank(a);
      const auto threshold = static_cast<std::size_t>(std::floor(frac * static_cast<double>(r) + 1e-9));
      std::uint64_t hits = 0;
      for (std::uint64_t w = 0; w < (std::uint64_t{1} << k); ++w) {
        std::size_t weight = 0;
        for (std::size_t i = 0; i < rows; ++i) {
          std::int64_t s = v[i];
          for (std::size_t j = 0; j < k; ++j)
            if ((w >> j) & 1) s += a(i, j);
          weight += oracle::mod(s, mv) != 0;
        }
        hits += weight <= threshold;
      }
      CHECK(res.hits == hits);
      CHECK(res.trials == (std::uint64_t{1} << k));
      const double h = binary_entropy(frac);
      CHECK(res.bound == doctest::Approx(std::exp2((frac + h - 1.0) * static_cast<double>(r))));

      TailOptions mc;
      mc.mode = TailMode::MonteCarlo;
      mc.samples = 20000;
      mc.seed = 9;
      const auto est = weight_tail_experiment(a, v, frac, mc);
      CHECK(est.empirical == doctest::Approx(res.empirical).epsilon(0.05).scale(1.0));
    }
  }
}

TEST_CASE("weight tail: random full-rank 8x8 over Z_3 at t = 1/4 (soft check)") {
  Rng rng(7);
  const auto a = random_full_rank(rng, Modulus::of(3), 8);
  std::vector<Residue> v(8);
  for (auto& x : v) x = static_cast<Residue>(rng.below(3));
  const auto res = weight_tail_experiment(a, v, 0.25);
  MESSAGE("empirical " << res.empirical << " vs bound " << res.bound);
  WARN(res.empirical <= 2.0 * res.bound);
}

TEST_CASE("hyperplane count: at most 2^d solutions") {
  Rng rng(8);
  for (std::int64_t mv : {2, 3, 4, 5, 8, 9}) {
    const Modulus m = Modulus::of(mv);
    for (int t = 0; t < 25; ++t) {
      const std::size_t k = 1 + rng.below(12);
      const std::size_t d = rng.below(std::min<std::size_t>(k, 3) + 1);
      const auto a = random_full_rank(rng, m, k);
      const auto h = random_matrix(rng, m, d, k);
      std::vector<Residue> v(k);
      for (auto& x : v) x = static_cast<Residue>(rng.below(static_cast<std::uint64_t>(mv)));
      const auto count = count_in_span(a, v, h);
      CHECK(count <= (std::uint64_t{1} << d));
      if (k <= 6) {
        // Direct membership test against the enumerated span.
        const auto span = oracle::closure(oracle::rows(h), mv, k);
        std::uint64_t direct = 0;
        for (std::uint64_t w = 0; w < (std::uint64_t{1} << k); ++w) {
          std::vector<Residue> y(k);
          for (std::size_t i = 0; i < k; ++i) {
            std::int64_t s = v[i];
            for (std::size_t j = 0; j < k; ++j)
              if ((w >> j) & 1) s += a(i, j);
            y[i] = oracle::mod(s, mv);
          }
          direct += std::binary_search(span.begin(), span.end(), y);
        }
        CHECK(direct == count);
      }
    }
  }
}

TEST_CASE("binary entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
  CHECK(binary_entropy(0.25) == doctest::Approx(0.8112781244591328));
}
