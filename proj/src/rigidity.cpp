#include "modquad/rigidity.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "modquad/random.hpp"

namespace modquad {

namespace {

void require_symmetric_prime_power(const ZmMatrix& a, const char* what) {
  if (!a.is_symmetric()) throw PreconditionError(std::string(what) + " requires a symmetric matrix");
  if (!a.modulus().is_prime_power()) {
    throw PreconditionError(std::string("prime-power required: ") + what + " needs m = p^k, got m = " +
                            std::to_string(a.modulus().value()));
  }
}

OffDiagonalBlock block_from_mask(const ZmMatrix& a, const std::vector<bool>& in_rows) {
  OffDiagonalBlock b;
  for (std::size_t i = 0; i < in_rows.size(); ++i) (in_rows[i] ? b.rows : b.cols).push_back(i);
  b.shape = group_shape(a.submatrix(b.rows, b.cols));
  return b;
}

std::uint64_t saturating_power(std::int64_t base, std::size_t exp) {
  std::uint64_t acc = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (acc > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(base)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    acc *= static_cast<std::uint64_t>(base);
  }
  return acc;
}

unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Rank of A + diag(d) using a reusable scratch buffer.
class DiagonalRanker {
 public:
  explicit DiagonalRanker(const ZmMatrix& a) : a_(a), scratch_(a.entries().size()) {}
  std::size_t operator()(std::span<const Residue> d) {
    const std::size_t n = a_.rows();
    std::copy(a_.entries().begin(), a_.entries().end(), scratch_.begin());
    for (std::size_t i = 0; i < n; ++i) scratch_[i * n + i] = a_.modulus().add(scratch_[i * n + i], d[i]);
    return detail::rank_destructive(a_.modulus(), n, n, scratch_);
  }

 private:
  const ZmMatrix& a_;
  std::vector<Residue> scratch_;
};

}  // namespace

bool block_better(const GroupShape& a, const GroupShape& b) {
  if (a.rank() != b.rank()) return a.rank() > b.rank();
  const auto oa = a.order(), ob = b.order();
  if (oa != ob) return oa > ob;
  return std::lexicographical_compare(b.factors.begin(), b.factors.end(), a.factors.begin(), a.factors.end());
}

OffDiagonalBlock max_offdiag_rank(const ZmMatrix& a, const OffDiagonalOptions& options) {
  if (!a.is_symmetric()) throw PreconditionError("off-diagonal search requires a symmetric matrix");
  const std::size_t n = a.rows();
  OffDiagonalBlock best;
  best.exhaustive = true;
  if (n < 2) {
    best.rows.resize(n);
    std::iota(best.rows.begin(), best.rows.end(), 0);
    return best;
  }
  if (n <= options.exhaustive_max_n && n < 63) {
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    bool have = false;
    for (std::uint64_t mask = 1; mask < full; ++mask) {
      if ((full ^ mask) < mask) continue;  // transposed block already seen
      std::vector<bool> in_rows(n);
      for (std::size_t i = 0; i < n; ++i) in_rows[i] = (mask >> i) & 1;
      OffDiagonalBlock b = block_from_mask(a, in_rows);
      if (!have || block_better(b.shape, best.shape)) {
        best = std::move(b);
        have = true;
      }
    }
    best.exhaustive = true;
    return best;
  }

  Rng rng(options.seed);
  bool have = false;
  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, options.restarts); ++restart) {
    std::vector<bool> in_rows(n);
    for (std::size_t i = 0; i < n; ++i) in_rows[i] = restart == 0 ? (i < n / 2) : (rng.below(2) == 1);
    if (std::all_of(in_rows.begin(), in_rows.end(), [](bool b) { return b; })) in_rows[0] = false;
    if (std::none_of(in_rows.begin(), in_rows.end(), [](bool b) { return b; })) in_rows[0] = true;
    OffDiagonalBlock cur = block_from_mask(a, in_rows);
    for (bool improved = true; improved;) {
      improved = false;
      for (std::size_t i = 0; i < n; ++i) {
        in_rows[i] = !in_rows[i];
        const auto ones = std::count(in_rows.begin(), in_rows.end(), true);
        if (ones > 0 && static_cast<std::size_t>(ones) < n) {
          OffDiagonalBlock cand = block_from_mask(a, in_rows);
          if (block_better(cand.shape, cur.shape)) {
            cur = std::move(cand);
            improved = true;
            continue;
          }
        }
        in_rows[i] = !in_rows[i];
      }
    }
    if (!have || block_better(cur.shape, best.shape)) {
      best = std::move(cur);
      have = true;
    }
  }
  best.exhaustive = false;
  return best;
}

LowRankDiagonal construct_low_rank_diagonal(const ZmMatrix& a, const OffDiagonalBlock& block) {
  require_symmetric_prime_power(a, "low-rank diagonal construction");
  const Modulus& mod = a.modulus();
  const std::size_t n = a.rows();
  LowRankDiagonal out;
  out.diagonal.assign(n, 0);
  if (block.rank() == 0) {
    for (std::size_t i = 0; i < n; ++i) out.diagonal[i] = mod.neg(a(i, i));
    return out;
  }

  std::vector<std::size_t> rows = block.rows, cols = block.cols;
  {
    std::vector<bool> seen(n, false);
    for (std::size_t i : rows) seen[i] = true;
    for (std::size_t i : cols) {
      if (seen[i]) throw PreconditionError("block row and column index sets must be disjoint");
      seen[i] = true;
    }
    for (std::size_t i = 0; i < n; ++i)
      if (!seen[i]) cols.push_back(i);
    std::sort(cols.begin(), cols.end());
  }

  auto process_side = [&](const std::vector<std::size_t>& side_rows, const std::vector<std::size_t>& side_cols) {
    const ZmMatrix sub = a.submatrix(side_rows, side_cols);
    std::vector<std::size_t> local(side_rows.size());
    std::iota(local.begin(), local.end(), 0);
    std::vector<std::size_t> span;
    for (std::size_t k : spanning_rows(sub, local)) span.push_back(side_rows[k]);
    std::sort(span.begin(), span.end());
    for (std::size_t i : span) out.free_indices.push_back(i);

    for (std::size_t t : side_rows) {
      if (std::binary_search(span.begin(), span.end(), t)) continue;
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j < n; ++j)
        if (j != t && !std::binary_search(span.begin(), span.end(), j)) others.push_back(j);
      const ZmMatrix lhs = a.submatrix(span, others);
      std::vector<Residue> rhs(others.size());
      for (std::size_t k = 0; k < others.size(); ++k) rhs[k] = a(t, others[k]);
      const auto coeffs = solve_left_lex_least(lhs, rhs);
      if (!coeffs) {
        OffDiagonalBlock better;
        better.rows = span;
        better.rows.insert(std::upper_bound(better.rows.begin(), better.rows.end(), t), t);
        better.cols = others;
        better.shape = group_shape(a.submatrix(better.rows, better.cols));
        throw InfeasibleCombination("row " + std::to_string(t) +
                                        " is not a combination of the spanning rows; the block was not maximal",
                                    std::move(better));
      }
      Residue target = 0;
      for (std::size_t k = 0; k < span.size(); ++k) target = mod.add(target, mod.mul((*coeffs)[k], a(span[k], t)));
      out.diagonal[t] = mod.sub(target, a(t, t));
    }
  };
  process_side(rows, cols);
  process_side(cols, rows);
  std::sort(out.free_indices.begin(), out.free_indices.end());
  return out;
}

ConstructionResult low_rank_diagonal(const ZmMatrix& a, const OffDiagonalOptions& options) {
  ConstructionResult res;
  res.block = max_offdiag_rank(a, options);
  const std::size_t limit = a.rows() * a.rows() * 8 + 8;
  for (;;) {
    try {
      res.diagonal = construct_low_rank_diagonal(a, res.block);
      return res;
    } catch (const InfeasibleCombination& e) {
      res.block = e.better();
      res.block.exhaustive = false;
      if (++res.retries > limit) throw;
    }
  }
}

namespace {

struct ChunkResult {
  std::size_t best = std::numeric_limits<std::size_t>::max();
  std::vector<Residue> witness;
};

RigidityReport exhaustive_min(const ZmMatrix& a, std::size_t lower, unsigned workers) {
  const std::size_t n = a.rows();
  const std::int64_t m = a.modulus().value();
  std::size_t prefix = 0;
  std::uint64_t chunks = 1;
  while (prefix < n && chunks < 4ull * workers) {
    chunks *= static_cast<std::uint64_t>(m);
    ++prefix;
  }
  std::vector<ChunkResult> results(chunks);
  std::atomic<std::uint64_t> next{0};
  std::atomic<std::uint64_t> stop_at{std::numeric_limits<std::uint64_t>::max()};

  auto work = [&]() {
    DiagonalRanker ranker(a);
    std::vector<Residue> d(n);
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= chunks) return;
      if (c > stop_at.load()) continue;
      std::uint64_t code = c;
      for (std::size_t i = prefix; i-- > 0;) {
        d[i] = static_cast<Residue>(code % static_cast<std::uint64_t>(m));
        code /= static_cast<std::uint64_t>(m);
      }
      std::fill(d.begin() + static_cast<std::ptrdiff_t>(prefix), d.end(), 0);
      ChunkResult& r = results[c];
      for (std::uint64_t step = 0;; ++step) {
        if ((step & 1023) == 0 && c > stop_at.load()) break;
        const std::size_t rk = ranker(d);
        if (rk < r.best) {
          r.best = rk;
          r.witness = d;
          if (rk <= lower) {
            std::uint64_t cur = stop_at.load();
            while (c < cur && !stop_at.compare_exchange_weak(cur, c)) {
            }
            break;
          }
        }
        bool advanced = false;
        for (std::size_t i = n; i > prefix && !advanced; --i) {
          if (++d[i - 1] < m) {
            advanced = true;
          } else {
            d[i - 1] = 0;
          }
        }
        if (!advanced) break;
      }
    }
  };
  const unsigned threads = static_cast<unsigned>(std::min<std::uint64_t>(workers, chunks));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  RigidityReport rep;
  rep.exact = true;
  rep.min_rank = std::numeric_limits<std::size_t>::max();
  const std::uint64_t last = std::min<std::uint64_t>(stop_at.load(), chunks - 1);
  for (std::uint64_t c = 0; c <= last; ++c) {
    if (results[c].best < rep.min_rank) {
      rep.min_rank = results[c].best;
      rep.witness_diagonal = results[c].witness;
    }
  }
  return rep;
}

}  // namespace

RigidityReport min_diag_rank(const ZmMatrix& a, const RigidityOptions& options) {
  require_symmetric_prime_power(a, "diagonal rigidity");
  const std::size_t n = a.rows();
  const Modulus& mod = a.modulus();
  const std::int64_t m = mod.value();

  OffDiagonalOptions od = options.offdiag;
  od.seed = options.seed;
  const OffDiagonalBlock block = max_offdiag_rank(a, od);
  const std::uint64_t space = saturating_power(m, n);

  RigidityReport rep;
  if (space <= options.exact_budget) {
    rep = exhaustive_min(a, block.rank(), resolve_workers(options.workers));
  } else {
    DiagonalRanker ranker(a);
    const std::size_t lower = block.rank();
    std::vector<Residue> best(n, 0);
    std::size_t best_rank = ranker(best);
    auto consider = [&](const std::vector<Residue>& d) {
      const std::size_t r = ranker(d);
      if (r < best_rank) {
        best_rank = r;
        best = d;
      }
    };
    std::vector<Residue> neg(n);
    for (std::size_t i = 0; i < n; ++i) neg[i] = mod.neg(a(i, i));
    consider(neg);

    OffDiagonalBlock start = block;
    LowRankDiagonal built;
    for (std::size_t tries = 0;; ++tries) {
      try {
        built = construct_low_rank_diagonal(a, start);
        break;
      } catch (const InfeasibleCombination& e) {
        start = e.better();
        if (tries > n * n * 8) throw;
      }
    }
    consider(built.diagonal);

    Rng rng(options.seed ^ 0x5DEECE66Dull);
    std::vector<Residue> d(n);
    for (std::uint64_t s = 0; s < options.samples && best_rank > lower; ++s) {
      for (auto& x : d) x = static_cast<Residue>(rng.below(static_cast<std::uint64_t>(m)));
      consider(d);
    }

    // Exhaust the entries the construction leaves free.
    const auto& free = built.free_indices;
    if (best_rank > lower && !free.empty() && saturating_power(m, free.size()) <= 100'000) {
      d = built.diagonal;
      for (std::size_t i : free) d[i] = 0;
      for (;;) {
        consider(d);
        if (best_rank <= lower) break;
        std::size_t k = 0;
        while (k < free.size() && ++d[free[k]] == m) d[free[k++]] = 0;
        if (k == free.size()) break;
      }
    }

    // Coordinate descent from the incumbent.
    for (bool improved = true; improved && best_rank > lower;) {
      improved = false;
      for (std::size_t i = 0; i < n && best_rank > lower; ++i) {
        d = best;
        for (Residue v = 0; v < m; ++v) {
          if (v == best[i]) continue;
          d[i] = v;
          const std::size_t r = ranker(d);
          if (r < best_rank) {
            best_rank = r;
            best = d;
            improved = true;
          }
        }
      }
    }
    rep.min_rank = best_rank;
    rep.witness_diagonal = best;
    rep.exact = best_rank == lower;
  }
  rep.offdiag_rank = block.rank();
  rep.offdiag_block = block;
  rep.search_space = space;
  return rep;
}

double binary_entropy(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  return -t * std::log2(t) - (1.0 - t) * std::log2(1.0 - t);
}

TailResult weight_tail_experiment(const ZmMatrix& a, std::span<const Residue> v, double t,
                                  const TailOptions& options) {
  if (t < 0.0 || t > 1.0) throw PreconditionError("t must lie in [0, 1]");
  if (v.size() != a.rows()) {
    throw PreconditionError("v must have one entry per row of A (" + std::to_string(a.rows()) + "), got " +
                            std::to_string(v.size()));
  }
  const Modulus& mod = a.modulus();
  const std::size_t rows = a.rows(), k = a.cols();
  const std::size_t r = rank(a);
  const auto threshold = static_cast<std::size_t>(std::floor(t * static_cast<double>(r) + 1e-9));
  TailResult res;
  res.bound = std::exp2((t + binary_entropy(t) - 1.0) * static_cast<double>(r));

  std::vector<Residue> y(rows);
  for (std::size_t i = 0; i < rows; ++i) y[i] = mod.reduce(v[i]);
  if (options.mode == TailMode::Exhaustive) {
    if (k > 24) throw BudgetExceeded("exhaustive weight-tail enumeration supports k <= 24");
    std::size_t weight = static_cast<std::size_t>(std::count_if(y.begin(), y.end(), [](Residue e) { return e != 0; }));
    std::uint64_t gray = 0;
    const std::uint64_t total = std::uint64_t{1} << k;
    res.hits = weight <= threshold ? 1 : 0;
    for (std::uint64_t step = 1; step < total; ++step) {
      const auto j = static_cast<std::size_t>(__builtin_ctzll(step));
      gray ^= std::uint64_t{1} << j;
      const bool adding = (gray >> j) & 1;
      for (std::size_t i = 0; i < rows; ++i) {
        const Residue col = a(i, j);
        if (col == 0) continue;
        const bool was = y[i] != 0;
        y[i] = adding ? mod.add(y[i], col) : mod.sub(y[i], col);
        const bool now = y[i] != 0;
        if (was != now) weight += now ? 1 : std::size_t(-1);
      }
      if (weight <= threshold) ++res.hits;
    }
    res.trials = total;
  } else {
    std::vector<Residue> z(rows);
    for (std::uint64_t s = 0; s < options.samples; ++s) {
      z = y;
      for (std::size_t j = 0; j < k; ++j) {
        const std::uint64_t word = splitmix64(options.seed ^ splitmix64(s * ((k + 63) / 64) + j / 64));
        if (!((word >> (j % 64)) & 1)) continue;
        for (std::size_t i = 0; i < rows; ++i) z[i] = mod.add(z[i], a(i, j));
      }
      const auto weight = static_cast<std::size_t>(std::count_if(z.begin(), z.end(), [](Residue e) { return e != 0; }));
      if (weight <= threshold) ++res.hits;
    }
    res.trials = options.samples;
  }
  res.empirical = res.trials == 0 ? 0.0 : static_cast<double>(res.hits) / static_cast<double>(res.trials);
  return res;
}

std::uint64_t count_in_span(const ZmMatrix& a, std::span<const Residue> v, const ZmMatrix& span_rows) {
  if (v.size() != a.rows() || span_rows.cols() != a.rows()) {
    throw PreconditionError("v and the spanning vectors must have one entry per row of A");
  }
  const std::size_t k = a.cols(), rows = a.rows();
  if (k > 24) throw BudgetExceeded("span counting enumerates B^k and supports k <= 24");
  const Modulus& mod = a.modulus();
  const auto snf = smith_normal_form(span_rows);
  const std::size_t d = span_rows.rows(), steps = std::min(d, rows);
  auto in_span = [&](const std::vector<Residue>& y) {
    for (std::size_t j = 0; j < rows; ++j) {
      Residue c = 0;
      for (std::size_t i = 0; i < rows; ++i) c = (c + y[i] * snf.Q(i, j)) % mod.value();
      if (j >= steps || snf.D(j, j) == 0) {
        if (c != 0) return false;
      } else if (c % snf.D(j, j) != 0) {
        return false;
      }
    }
    return true;
  };
  std::uint64_t count = 0;
  std::vector<Residue> y(rows);
  for (std::uint64_t w = 0; w < (std::uint64_t{1} << k); ++w) {
    for (std::size_t i = 0; i < rows; ++i) {
      Residue acc = mod.reduce(v[i]);
      for (std::size_t j = 0; j < k; ++j)
        if ((w >> j) & 1) acc = mod.add(acc, a(i, j));
      y[i] = acc;
    }
    if (in_span(y)) ++count;
  }
  return count;
}

}  // namespace modquad
