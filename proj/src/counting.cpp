#include "modquad/counting.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "modquad/errors.hpp"
#include "parallel.hpp"

namespace modquad {

std::uint64_t ResidueHistogram::total() const {
  std::uint64_t s = 0;
  for (auto c : counts) s += c;
  return s;
}

namespace {

constexpr std::int64_t kMaxHistogramModulus = std::int64_t{1} << 24;

struct HistogramPlan {
  std::size_t n = 0, low = 0, high = 0;
  std::uint32_t m = 0;
  std::vector<std::uint32_t> low_table;  // f restricted to the low variables, constant included
  std::vector<std::uint32_t> lin;        // linear coefficients
  std::vector<std::uint32_t> q;          // dense symmetric quadratic coefficients
};

HistogramPlan make_plan(const QuadPoly& f) {
  HistogramPlan p;
  p.n = f.n();
  p.m = static_cast<std::uint32_t>(f.modulus().value());
  p.low = std::min<std::size_t>(p.n, 10);
  p.high = p.n - p.low;
  p.lin.resize(p.n);
  p.q.resize(p.n * p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    p.lin[i] = static_cast<std::uint32_t>(f.linear(i));
    for (std::size_t j = 0; j < p.n; ++j) p.q[i * p.n + j] = i == j ? 0 : static_cast<std::uint32_t>(f.quad(i, j));
  }
  const std::size_t size = std::size_t{1} << p.low;
  p.low_table.assign(size, 0);
  p.low_table[0] = static_cast<std::uint32_t>(f.constant());
  for (std::size_t x = 1; x < size; ++x) {
    const std::size_t b = 63 - static_cast<std::size_t>(__builtin_clzll(x));
    const std::size_t rest = x ^ (std::size_t{1} << b);
    std::uint64_t v = p.low_table[rest] + p.lin[b];
    for (std::size_t r = rest; r != 0; r &= r - 1) v += p.q[static_cast<std::size_t>(__builtin_ctzll(r)) * p.n + b];
    p.low_table[x] = static_cast<std::uint32_t>(v % p.m);
  }
  return p;
}

// Enumerates the subcube where the top `fixed` high variables equal
// `prefix`, visiting the remaining high variables in Gray-code order.
void histogram_subcube(const HistogramPlan& p, std::size_t fixed, std::uint64_t prefix, std::vector<std::uint64_t>& counts,
                       std::vector<std::uint32_t>& lin_sum) {
  const std::uint32_t m = p.m;
  const std::size_t L = p.low, H = p.high, n = p.n;
  const std::size_t free_bits = H - fixed;
  std::uint64_t x_high = prefix << free_bits;

  // f_high: terms among high variables; c_low[i]: coefficient picked up by
  // low variable i from the active high variables.
  std::uint64_t f_high = 0;
  std::vector<std::uint32_t> c_low(L, 0);
  for (std::size_t a = 0; a < H; ++a) {
    if (!((x_high >> a) & 1)) continue;
    const std::size_t va = L + a;
    f_high += p.lin[va];
    for (std::size_t b = a + 1; b < H; ++b)
      if ((x_high >> b) & 1) f_high += p.q[va * n + L + b];
    for (std::size_t i = 0; i < L; ++i) c_low[i] = static_cast<std::uint32_t>((c_low[i] + p.q[i * n + va]) % m);
  }
  std::uint32_t fh = static_cast<std::uint32_t>(f_high % m);

  const std::size_t low_size = std::size_t{1} << L;
  const std::uint32_t* table = p.low_table.data();
  std::uint32_t* s = lin_sum.data();
  std::uint64_t* hist = counts.data();
  const std::uint64_t steps = std::uint64_t{1} << free_bits;
  for (std::uint64_t step = 0;; ++step) {
    s[0] = 0;
    for (std::size_t x = 1; x < low_size; ++x) {
      std::uint32_t v = s[x & (x - 1)] + c_low[static_cast<std::size_t>(__builtin_ctzll(x))];
      s[x] = v >= m ? v - m : v;
    }
    for (std::size_t x = 0; x < low_size; ++x) {
      std::uint32_t v = table[x] + s[x];
      v = v >= m ? v - m : v;
      v += fh;
      v = v >= m ? v - m : v;
      ++hist[v];
    }
    if (step + 1 == steps) break;
    const auto a = static_cast<std::size_t>(__builtin_ctzll(step + 1));
    const std::size_t va = L + a;
    x_high ^= std::uint64_t{1} << a;
    const bool on = (x_high >> a) & 1;
    std::uint64_t delta = p.lin[va];
    for (std::size_t b = 0; b < H; ++b)
      if (b != a && ((x_high >> b) & 1)) delta += p.q[va * n + L + b];
    const auto d = static_cast<std::uint32_t>(delta % m);
    fh = on ? (fh + d) % m : (fh + m - d) % m;
    for (std::size_t i = 0; i < L; ++i) {
      const std::uint32_t qi = p.q[i * n + va];
      c_low[i] = on ? (c_low[i] + qi) % m : (c_low[i] + m - qi) % m;
    }
  }
}

}  // namespace

ResidueHistogram residue_histogram(const QuadPoly& f, const HistogramOptions& options) {
  if (f.n() > options.max_n) {
    throw BudgetExceeded("histogram enumeration over 2^" + std::to_string(f.n()) +
                         " points exceeds the limit n <= " + std::to_string(options.max_n));
  }
  if (f.n() > 62) throw BudgetExceeded("histogram enumeration supports at most 62 variables");
  if (f.modulus().value() > kMaxHistogramModulus) {
    throw PreconditionError("histograms support moduli up to 2^24");
  }
  const HistogramPlan plan = make_plan(f);
  const unsigned workers = detail::resolve_workers(options.workers);
  std::size_t fixed = 0;
  while (fixed < plan.high && (std::uint64_t{1} << fixed) < 4ull * workers && workers > 1) ++fixed;
  const std::uint64_t tasks = std::uint64_t{1} << fixed;

  std::vector<std::vector<std::uint64_t>> local(std::min<std::uint64_t>(workers, tasks),
                                                std::vector<std::uint64_t>(plan.m, 0));
  std::vector<std::vector<std::uint32_t>> scratch(local.size(), std::vector<std::uint32_t>(std::size_t{1} << plan.low));
  detail::run_tasks(tasks, static_cast<unsigned>(local.size()), [&](std::uint64_t t, unsigned w) {
    histogram_subcube(plan, fixed, t, local[w], scratch[w]);
  });

  ResidueHistogram h;
  h.modulus = plan.m;
  h.n = plan.n;
  h.counts.assign(plan.m, 0);
  for (const auto& l : local)
    for (std::size_t y = 0; y < plan.m; ++y) h.counts[y] += l[y];
  return h;
}

bool check_weak_or(const QuadPoly& f, const HistogramOptions& options) {
  if (f.constant() != 0) return false;
  return residue_histogram(f, options).zeros() == 1;
}

bool check_weak_representation(const QuadPoly& f, std::span<const std::uint8_t> g_table) {
  if (f.n() > 30) throw BudgetExceeded("weak representation check supports n <= 30");
  const std::uint64_t points = std::uint64_t{1} << f.n();
  if (g_table.size() != points) throw PreconditionError("truth table must have 2^n entries");
  const auto m = static_cast<std::size_t>(f.modulus().value());
  std::vector<std::uint8_t> seen(m, 0);  // bit 0: g = 0 somewhere, bit 1: g = 1 somewhere
  for (std::uint64_t x = 0; x < points; ++x) {
    const auto y = static_cast<std::size_t>(f.evaluate_bits(x));
    seen[y] |= g_table[x] ? 2 : 1;
    if (seen[y] == 3) return false;
  }
  return true;
}

double ExpSumValue::magnitude() const { return std::hypot(real, imag); }

std::vector<std::complex<double>> roots_of_unity(std::int64_t m) {
  std::vector<std::complex<double>> r(static_cast<std::size_t>(m));
  for (std::int64_t k = 0; k < m; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(m);
    r[static_cast<std::size_t>(k)] = {std::cos(angle), std::sin(angle)};
  }
  return r;
}

namespace {
std::complex<double> exp_sum_with(const ResidueHistogram& h, Residue j, const std::vector<std::complex<double>>& roots) {
  const std::int64_t m = h.modulus;
  const Residue jj = ((j % m) + m) % m;
  std::complex<double> acc = 0.0;
  for (std::int64_t y = 0; y < m; ++y) {
    const auto c = h.counts[static_cast<std::size_t>(y)];
    if (c == 0) continue;
    acc += static_cast<double>(c) * roots[static_cast<std::size_t>(jj * y % m)];
  }
  return acc / std::ldexp(1.0, static_cast<int>(h.n));
}
}  // namespace

ExpSumValue exp_sum(const ResidueHistogram& h, Residue j) {
  const auto v = exp_sum_with(h, j, roots_of_unity(h.modulus));
  return ExpSumValue{j, v.real(), v.imag(), true};
}

ExpSumValue exp_sum(const QuadPoly& f, Residue j, const HistogramOptions& options) {
  return exp_sum(residue_histogram(f, options), j);
}

IdentityResiduals verify_counting_identities(const QuadPoly& f, std::int64_t m1, std::int64_t m2,
                                             const HistogramOptions& options) {
  const std::int64_t m = f.modulus().value();
  if (m1 < 1 || m2 < 1 || m1 * m2 != m) {
    throw PreconditionError("m1 * m2 must equal m = " + std::to_string(m) + ", got " + std::to_string(m1) + " * " +
                            std::to_string(m2));
  }
  const ResidueHistogram h = residue_histogram(f, options);
  const auto roots = roots_of_unity(m);
  const double cube = std::ldexp(1.0, static_cast<int>(f.n()));
  IdentityResiduals out;
  out.m1 = m1;
  out.m2 = m2;
  out.zero_fraction = static_cast<double>(h.zeros()) / cube;

  std::complex<double> all = 0.0, not_multiple_of_m1 = 0.0;
  for (std::int64_t j = 1; j < m; ++j) {
    const auto s = exp_sum_with(h, j, roots);
    all += s;
    if (j % m1 != 0) not_multiple_of_m1 += s;
  }
  const double md = static_cast<double>(m);
  out.residual_ct = std::abs(out.zero_fraction - (1.0 / md + all / md));

  std::uint64_t zeros_mod_m2 = 0;
  if (m2 == 1) {
    zeros_mod_m2 = h.total();
  } else {
    zeros_mod_m2 = residue_histogram(f.reduce_mod(m2), options).zeros();
  }
  const std::complex<double> split =
      not_multiple_of_m1 / md + static_cast<double>(zeros_mod_m2) / (static_cast<double>(m1) * cube);
  out.residual_split = std::abs(out.zero_fraction - split);
  return out;
}

WeylResult weyl_difference_bound(const QuadPoly& f, const WeylOptions& options) {
  const std::size_t n = f.n();
  if (n > options.max_n) {
    throw BudgetExceeded("Weyl bound supports n <= " + std::to_string(options.max_n) + ", got " + std::to_string(n));
  }
  std::uint64_t differences = 1;
  for (std::size_t i = 0; i < n; ++i) differences *= 3;
  if (differences > options.max_differences) {
    throw BudgetExceeded("Weyl bound needs 3^" + std::to_string(n) + " difference vectors, above the budget of " +
                         std::to_string(options.max_differences));
  }
  const std::int64_t m = f.modulus().value();
  const Modulus& mod = f.modulus();
  WeylResult res;
  HistogramOptions ho;
  ho.max_n = std::max<std::size_t>(n, 1);
  const ExpSumValue e = exp_sum(f, 1, ho);
  res.lhs_sq = e.real * e.real + e.imag * e.imag;

  // |1 + e_m(c)| for every residue c.
  std::vector<double> factor(static_cast<std::size_t>(m));
  for (std::int64_t c = 0; c < m; ++c)
    factor[static_cast<std::size_t>(c)] = 2.0 * std::abs(std::cos(std::numbers::pi * static_cast<double>(c) / static_cast<double>(m)));

  double total = 0.0;
  std::vector<Residue> c(n);
  std::vector<std::size_t> support;
  for (std::uint64_t s_mask = 0; s_mask < (std::uint64_t{1} << n); ++s_mask) {
    support.clear();
    for (std::size_t i = 0; i < n; ++i)
      if ((s_mask >> i) & 1) support.push_back(i);
    // All signs +1 to start: c_j = sum_{i in S} q_ij.
    for (std::size_t j = 0; j < n; ++j) {
      Residue acc = 0;
      for (std::size_t i : support) acc = mod.add(acc, f.quad(i, j));
      c[j] = acc;
    }
    std::uint64_t signs = 0;  // bit k set: h_{support[k]} = -1
    const std::uint64_t combos = std::uint64_t{1} << support.size();
    for (std::uint64_t step = 0;; ++step) {
      double prod = 1.0;
      for (std::size_t j = 0; j < n && prod != 0.0; ++j)
        if (!((s_mask >> j) & 1)) prod *= factor[static_cast<std::size_t>(c[j])];
      total += prod;
      if (step + 1 == combos) break;
      const auto k = static_cast<std::size_t>(__builtin_ctzll(step + 1));
      signs ^= std::uint64_t{1} << k;
      const std::size_t i = support[k];
      const bool to_negative = (signs >> k) & 1;
      for (std::size_t j = 0; j < n; ++j) {
        const Residue twice = mod.add(f.quad(i, j), f.quad(i, j));
        c[j] = to_negative ? mod.sub(c[j], twice) : mod.add(c[j], twice);
      }
    }
  }
  res.rhs = std::ldexp(total, -2 * static_cast<int>(n));
  return res;
}

LinearSumResult linear_exp_sum(std::span<const Residue> coeffs, std::int64_t m) {
  if (m < 2) throw PreconditionError("modulus must be at least 2");
  LinearSumResult r;
  r.exact_magnitude = 1.0;
  for (Residue a : coeffs) {
    const Residue aa = ((a % m) + m) % m;
    if (aa == 0) continue;
    ++r.t;
    r.exact_magnitude *= std::abs(std::cos(std::numbers::pi * static_cast<double>(aa) / static_cast<double>(m)));
  }
  const double md = static_cast<double>(m);
  r.bound = std::pow(1.0 - 1.0 / (md * md), static_cast<double>(r.t));
  return r;
}

namespace {

// Coefficient layout for the unrestricted search: linear_1..linear_n, then
// quad_{ij} for i < j in lexicographic order.
struct OrCandidateSpace {
  std::size_t n;
  std::int64_t m;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  std::uint64_t size() const {
    std::uint64_t s = 1;
    for (std::size_t i = 0; i < n; ++i) s *= static_cast<std::uint64_t>(m - 1);
    for (std::size_t k = 0; k < pairs.size(); ++k) s *= static_cast<std::uint64_t>(m);
    return s;
  }
};

std::uint64_t saturating_pow(std::int64_t base, std::size_t e) {
  std::uint64_t acc = 1;
  for (std::size_t i = 0; i < e; ++i) {
    if (acc > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(base)) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    acc *= static_cast<std::uint64_t>(base);
  }
  return acc;
}

std::vector<Residue> canonical_key(const QuadPoly& f) {
  const std::size_t n = f.n();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::vector<Residue> best;
  do {
    std::vector<Residue> key;
    key.reserve(n + n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i) key.push_back(f.linear(perm[i]));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) key.push_back(f.quad(perm[i], perm[j]));
    if (best.empty() || key < best) best = std::move(key);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

}  // namespace

OrSearchResult search_or_quadratics(std::size_t n, std::int64_t m, const OrSearchOptions& options) {
  if (m < 2) throw PreconditionError("modulus must be at least 2");
  if (n == 0) throw PreconditionError("OR search needs n >= 1");
  const Modulus mod = Modulus::of(m);
  OrSearchResult res;

  if (options.restriction == OrRestriction::Symmetric) {
    // a * e1 + b * e2 + c evaluated at weight k is a k + b k(k-1)/2 + c.
    res.candidate_space = saturating_pow(m, 3);
    for (std::int64_t a = 0; a < m; ++a)
      for (std::int64_t b = 0; b < m; ++b)
        for (std::int64_t c = 0; c < m; ++c) {
          if (c != 0) continue;
          bool ok = true;
          for (std::size_t k = 1; k <= n && ok; ++k) {
            const auto kk = static_cast<std::int64_t>(k);
            ok = mod.reduce(a * kk + b * (kk * (kk - 1) / 2 % m)) != 0;
          }
          if (!ok) continue;
          ++res.count;
          if (options.mode != SearchMode::Count) {
            QuadPoly f(mod, n);
            for (std::size_t i = 0; i < n; ++i) {
              f.set_linear(i, a);
              for (std::size_t j = i + 1; j < n; ++j) f.set_quad(i, j, b);
            }
            res.found.push_back(std::move(f));
            if (options.mode == SearchMode::First) return res;
          }
        }
    return res;
  }

  if (n > 20) throw BudgetExceeded("unrestricted OR search supports n <= 20");
  if (options.canonicalize && n > 8) throw PreconditionError("canonicalization under variable permutations needs n <= 8");
  OrCandidateSpace space{n, m, {}};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) space.pairs.emplace_back(i, j);
  res.candidate_space = saturating_pow(m, 1 + n + space.pairs.size());
  if (res.candidate_space > options.budget) {
    throw BudgetExceeded("OR search space m^(1+n+n(n-1)/2) = " +
                         (res.candidate_space == std::numeric_limits<std::uint64_t>::max()
                              ? std::string("overflow")
                              : std::to_string(res.candidate_space)) +
                         " exceeds the budget of " + std::to_string(options.budget));
  }
  const std::uint64_t total = space.size();
  const std::size_t q_count = space.pairs.size();
  const std::uint64_t points = std::uint64_t{1} << n;

  // Split the candidate range into contiguous chunks; results are merged in
  // chunk order so the outcome does not depend on the worker count.
  const unsigned workers = detail::resolve_workers(options.workers);
  const std::uint64_t chunk_count = std::min<std::uint64_t>(total, std::max<std::uint64_t>(1, 16ull * workers));
  struct Chunk {
    std::uint64_t count = 0;
    std::vector<std::vector<Residue>> hits;
  };
  std::vector<Chunk> chunks(chunk_count);
  std::atomic<std::uint64_t> first_hit{std::numeric_limits<std::uint64_t>::max()};

  detail::run_tasks(chunk_count, workers, [&](std::uint64_t ci, unsigned) {
    if (options.mode == SearchMode::First && ci > first_hit.load()) return;
    const std::uint64_t begin = total / chunk_count * ci + std::min(ci, total % chunk_count);
    const std::uint64_t end = begin + total / chunk_count + (ci < total % chunk_count ? 1 : 0);
    // digits[0..n) linear (offset by 1), digits[n..) quadratic; last digit fastest.
    std::vector<Residue> digits(n + q_count);
    {
      std::uint64_t code = begin;
      for (std::size_t k = n + q_count; k-- > 0;) {
        const std::uint64_t radix = k < n ? static_cast<std::uint64_t>(m - 1) : static_cast<std::uint64_t>(m);
        digits[k] = static_cast<Residue>(code % radix) + (k < n ? 1 : 0);
        code /= radix;
      }
    }
    std::vector<Residue> qmat(n * n, 0);
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      for (std::size_t k = 0; k < q_count; ++k) {
        const auto [i, j] = space.pairs[k];
        qmat[i * n + j] = digits[n + k];
      }
      bool ok = true;
      for (std::uint64_t x = 1; x < points && ok; ++x) {
        std::int64_t acc = 0;
        for (std::uint64_t r = x; r != 0; r &= r - 1) {
          const auto i = static_cast<std::size_t>(__builtin_ctzll(r));
          acc += digits[i];
          for (std::uint64_t s = r & (r - 1); s != 0; s &= s - 1) acc += qmat[i * n + static_cast<std::size_t>(__builtin_ctzll(s))];
        }
        ok = acc % m != 0;
      }
      if (ok) {
        Chunk& c = chunks[ci];
        ++c.count;
        if (options.mode != SearchMode::Count || options.canonicalize) c.hits.push_back(digits);
        if (options.mode == SearchMode::First) {
          std::uint64_t cur = first_hit.load();
          while (ci < cur && !first_hit.compare_exchange_weak(cur, ci)) {
          }
          return;
        }
      }
      for (std::size_t k = n + q_count; k-- > 0;) {
        const Residue lo = k < n ? 1 : 0;
        if (++digits[k] < m) break;
        digits[k] = lo;
      }
    }
  });

  auto to_poly = [&](const std::vector<Residue>& d) {
    QuadPoly f(mod, n);
    for (std::size_t i = 0; i < n; ++i) f.set_linear(i, d[i]);
    for (std::size_t k = 0; k < q_count; ++k) f.set_quad(space.pairs[k].first, space.pairs[k].second, d[n + k]);
    return f;
  };
  std::set<std::vector<Residue>> classes;
  for (const Chunk& c : chunks) {
    if (options.mode == SearchMode::First && !c.hits.empty()) {
      res.count = 1;
      res.found.push_back(to_poly(c.hits.front()));
      return res;
    }
    if (!options.canonicalize) {
      res.count += c.count;
      if (options.mode == SearchMode::All)
        for (const auto& d : c.hits) res.found.push_back(to_poly(d));
      continue;
    }
    for (const auto& d : c.hits) {
      QuadPoly f = to_poly(d);
      if (classes.insert(canonical_key(f)).second) {
        ++res.count;
        if (options.mode == SearchMode::All) res.found.push_back(std::move(f));
      }
    }
  }
  return res;
}

}  // namespace modquad
