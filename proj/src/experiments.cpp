#include "modquad/experiments.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"

namespace modquad {

QuadPoly random_quadratic(Rng& rng, const Modulus& mod, std::size_t n) {
  const auto m = static_cast<std::uint64_t>(mod.value());
  QuadPoly f(mod, n);
  f.set_constant(static_cast<std::int64_t>(rng.below(m)));
  for (std::size_t i = 0; i < n; ++i) f.set_linear(i, static_cast<std::int64_t>(rng.below(m)));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) f.set_quad(i, j, static_cast<std::int64_t>(rng.below(m)));
  return f;
}

ZmMatrix random_symmetric(Rng& rng, const Modulus& mod, std::size_t n, bool even_only) {
  const auto m = static_cast<std::uint64_t>(mod.value());
  ZmMatrix a(mod, n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      Residue v = static_cast<Residue>(even_only ? 2 * rng.below((m + 1) / 2) : rng.below(m));
      v = mod.reduce(v);
      a(i, j) = v;
      a(j, i) = v;
    }
  return a;
}

ZmMatrix random_matrix(Rng& rng, const Modulus& mod, std::size_t rows, std::size_t cols) {
  ZmMatrix a(mod, rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) a(i, j) = static_cast<Residue>(rng.below(static_cast<std::uint64_t>(mod.value())));
  return a;
}

QuadPoly planted_rank_quadratic(Rng& rng, const Modulus& mod, std::size_t n, std::size_t planted_rank) {
  const auto m = static_cast<std::uint64_t>(mod.value());
  QuadPoly f(mod, n);
  for (std::size_t t = 0; t < planted_rank; ++t) {
    const auto c = static_cast<std::int64_t>(1 + rng.below(m - 1));
    std::vector<std::int64_t> v(n);
    for (auto& x : v) x = static_cast<std::int64_t>(rng.below(m));
    for (std::size_t i = 0; i < n; ++i) {
      if (v[i] == 0) continue;
      f.add_term(i, i, c * v[i] * v[i]);
      for (std::size_t j = i + 1; j < n; ++j)
        if (v[j] != 0) f.add_term(i, j, mod.reduce(2 * c * v[i] % mod.value() * v[j]));
    }
  }
  const std::size_t linear_terms = rng.below(4);
  for (std::size_t t = 0; t < linear_terms; ++t) {
    const auto i = rng.below(n);
    f.add_term(i, i, static_cast<std::int64_t>(rng.below(m)));
  }
  f.set_constant(static_cast<std::int64_t>(rng.below(m)));
  return f;
}

IdentitySweepResult identity_sweep(const IdentitySweepOptions& options) {
  IdentitySweepResult out;
  Rng rng(options.seed);
  const auto span = static_cast<std::uint64_t>(options.max_m - options.min_m + 1);
  for (std::size_t k = 0; k < options.count; ++k) {
    const std::int64_t m = options.min_m + static_cast<std::int64_t>(rng.below(span));
    const std::size_t n = 1 + rng.below(options.max_n);
    const QuadPoly f = random_quadratic(rng, Modulus::of(m), n);
    ++out.polynomials;
    for (std::int64_t m1 = 1; m1 <= m; ++m1) {
      if (m % m1 != 0) continue;
      const auto r = verify_counting_identities(f, m1, m / m1);
      ++out.factorizations;
      out.max_residual_ct = std::max(out.max_residual_ct, r.residual_ct);
      out.max_residual_split = std::max(out.max_residual_split, r.residual_split);
    }
  }
  return out;
}

namespace {

std::size_t dichotomy_planted_rank(std::size_t index, std::size_t n, Rng& rng) {
  switch (index % 5) {
    case 0: return 0;
    case 1: return 1;
    case 2: return 2 + rng.below(2);
    case 3: return 6 + rng.below(3);
    default: return n;
  }
}

}  // namespace

DichotomyResult dichotomy_sweep(const DichotomyOptions& options) {
  const Modulus mod = Modulus::of(options.m);
  DichotomyResult out;
  out.records.resize(options.count);
  const unsigned workers = detail::resolve_workers(options.workers);
  detail::run_tasks(options.count, workers, [&](std::size_t k, unsigned) {
    Rng rng(splitmix64(options.seed ^ splitmix64(k + 1)));
    DichotomyRecord rec;
    rec.planted_rank = dichotomy_planted_rank(k, options.n, rng);
    const QuadPoly f = rec.planted_rank == options.n ? random_quadratic(rng, mod, options.n)
                                                     : planted_rank_quadratic(rng, mod, options.n, rec.planted_rank);
    const AssocMatrix assoc = assoc_matrix(f);
    RigidityOptions ro = options.rigidity;
    ro.seed = splitmix64(options.seed + k);
    ro.offdiag.seed = ro.seed;
    ro.workers = 1;
    const RigidityReport rep = min_diag_rank(assoc.A, ro);
    rec.min_rank_upper = rep.min_rank;
    rec.offdiag_lower = rep.offdiag_rank;
    rec.magnitude = exp_sum(f, 1).magnitude();
    out.records[k] = rec;
  });
  for (const auto& r : out.records) {
    if (r.offdiag_lower >= options.high_threshold) {
      ++out.high_count;
      out.max_high = std::max(out.max_high, r.magnitude);
    }
    if (r.min_rank_upper <= options.low_threshold) {
      ++out.low_count;
      out.max_low = std::max(out.max_low, r.magnitude);
    }
  }
  out.separated = out.low_count > 0 && out.high_count > 0 && out.max_high < out.max_low;
  return out;
}

}  // namespace modquad
