#include "modquad/additive.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#include "modquad/errors.hpp"

namespace modquad {

std::int64_t AbelianShape::exponent() const {
  std::int64_t e = 1;
  for (std::int64_t d : factors) e = std::lcm(e, d);
  return e;
}

std::uint64_t AbelianShape::order() const {
  std::uint64_t o = 1;
  for (std::int64_t d : factors) {
    if (d < 1) throw PreconditionError("cyclic factor orders must be positive");
    if (o > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(d)) {
      throw PreconditionError("group order overflows 64 bits");
    }
    o *= static_cast<std::uint64_t>(d);
  }
  return o;
}

std::int64_t AbelianShape::p_group_prime() const {
  std::int64_t p = 0;
  for (std::int64_t d : factors) {
    if (d == 1) continue;
    const auto f = factorize(d);
    if (f.size() != 1) return 0;
    if (p != 0 && f[0].prime != p) return 0;
    p = f[0].prime;
  }
  return p;
}

namespace {

// Element k of G <-> coordinates in mixed radix (first factor most significant).
struct GroupIndex {
  std::vector<std::int64_t> factors;
  std::size_t size = 1;

  explicit GroupIndex(const AbelianShape& g) {
    for (std::int64_t d : g.factors)
      if (d > 1) factors.push_back(d);
    size = static_cast<std::size_t>(g.order());
  }
  std::vector<std::int64_t> coords(std::size_t k) const {
    std::vector<std::int64_t> c(factors.size());
    for (std::size_t i = factors.size(); i-- > 0;) {
      c[i] = static_cast<std::int64_t>(k % static_cast<std::size_t>(factors[i]));
      k /= static_cast<std::size_t>(factors[i]);
    }
    return c;
  }
  std::size_t index(const std::vector<std::int64_t>& c) const {
    std::size_t k = 0;
    for (std::size_t i = 0; i < factors.size(); ++i)
      k = k * static_cast<std::size_t>(factors[i]) + static_cast<std::size_t>(((c[i] % factors[i]) + factors[i]) % factors[i]);
    return k;
  }
  std::size_t add(std::size_t a, std::size_t b) const {
    auto ca = coords(a), cb = coords(b);
    for (std::size_t i = 0; i < ca.size(); ++i) ca[i] += cb[i];
    return index(ca);
  }
  std::size_t neg(std::size_t a) const {
    auto c = coords(a);
    for (auto& x : c) x = -x;
    return index(c);
  }
  std::size_t unit(std::size_t axis) const {
    std::vector<std::int64_t> c(factors.size(), 0);
    c[axis] = 1;
    return index(c);
  }
};

struct CyclicComponent {
  std::int64_t order = 1;
  std::vector<std::int64_t> generator;  // in the coordinates of the given shape
};

// Invariant factors n_1 | n_2 | ... with a generator of each, obtained by
// splitting every factor into prime-power parts and recombining the k-th
// largest part of each prime.
std::vector<CyclicComponent> invariant_components(const AbelianShape& g) {
  std::map<std::int64_t, std::vector<CyclicComponent>> primary;
  for (std::size_t axis = 0; axis < g.factors.size(); ++axis) {
    if (g.factors[axis] < 1) throw PreconditionError("cyclic factor orders must be positive");
    if (g.factors[axis] == 1) continue;
    const Modulus mod = Modulus::of(g.factors[axis]);
    for (const auto& pp : mod.factorization()) {
      CyclicComponent c;
      c.order = pp.value();
      c.generator.assign(g.factors.size(), 0);
      c.generator[axis] = g.factors[axis] / c.order;
      primary[pp.prime].push_back(std::move(c));
    }
  }
  std::size_t rank = 0;
  for (auto& [p, parts] : primary) {
    std::stable_sort(parts.begin(), parts.end(),
                     [](const CyclicComponent& a, const CyclicComponent& b) { return a.order < b.order; });
    rank = std::max(rank, parts.size());
  }
  std::vector<CyclicComponent> out(rank);
  for (std::size_t k = 0; k < rank; ++k) {
    out[k].generator.assign(g.factors.size(), 0);
    for (const auto& [p, parts] : primary) {
      if (k >= parts.size()) continue;
      const CyclicComponent& part = parts[parts.size() - 1 - k];
      out[k].order *= part.order;
      for (std::size_t axis = 0; axis < g.factors.size(); ++axis)
        out[k].generator[axis] = (out[k].generator[axis] + part.generator[axis]) % g.factors[axis];
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::vector<std::int64_t>> standard_witness(const AbelianShape& g) {
  std::vector<std::vector<std::int64_t>> w;
  for (const auto& c : invariant_components(g))
    for (std::int64_t k = 1; k < c.order; ++k) w.push_back(c.generator);
  return w;
}

DavenportResult search_davenport(const AbelianShape& g, const DavenportOptions& options) {
  const GroupIndex gi(g);
  if (gi.size > 64) {
    throw BudgetExceeded("exhaustive Davenport search supports groups of order <= 64, got " + std::to_string(gi.size));
  }
  const std::size_t size = gi.size;
  std::vector<std::vector<std::size_t>> plus(size, std::vector<std::size_t>(size));
  std::vector<std::size_t> negation(size);
  for (std::size_t a = 0; a < size; ++a) {
    negation[a] = gi.neg(a);
    for (std::size_t b = 0; b < size; ++b) plus[a][b] = gi.add(a, b);
  }
  auto shift = [&](std::uint64_t set, std::size_t by) {
    std::uint64_t out = 0;
    for (std::uint64_t s = set; s != 0; s &= s - 1) out |= std::uint64_t{1} << plus[static_cast<std::size_t>(__builtin_ctzll(s))][by];
    return out;
  };

  // State: the set of subsequence sums (always containing 0, the empty sum).
  std::unordered_map<std::uint64_t, std::uint8_t> memo;
  std::function<std::size_t(std::uint64_t)> longest = [&](std::uint64_t sums) -> std::size_t {
    if (auto it = memo.find(sums); it != memo.end()) return it->second;
    if (memo.size() >= options.state_budget) {
      throw BudgetExceeded("Davenport search exceeded the budget of " + std::to_string(options.state_budget) +
                           " states");
    }
    const std::size_t ceiling = size - static_cast<std::size_t>(__builtin_popcountll(sums));
    std::size_t best = 0;
    for (std::size_t e = 1; e < size && best < ceiling; ++e) {
      if ((sums >> negation[e]) & 1) continue;
      best = std::max(best, 1 + longest(sums | shift(sums, e)));
    }
    memo.emplace(sums, static_cast<std::uint8_t>(best));
    return best;
  };

  DavenportResult res;
  res.method = "search";
  std::uint64_t sums = 1;
  res.value = longest(sums);
  for (std::size_t left = res.value; left > 0; --left) {
    for (std::size_t e = 1; e < size; ++e) {
      if ((sums >> negation[e]) & 1) continue;
      const std::uint64_t next = sums | shift(sums, e);
      if (1 + longest(next) == left) {
        res.witness.push_back(gi.coords(e));
        sums = next;
        break;
      }
    }
  }
  res.states = memo.size();
  return res;
}

}  // namespace

AbelianShape invariant_factors(const AbelianShape& g) {
  AbelianShape out;
  for (const auto& c : invariant_components(g)) out.factors.push_back(c.order);
  return out;
}

std::size_t davenport_lower_bound(const AbelianShape& g) {
  std::size_t s = 0;
  for (std::int64_t d : invariant_factors(g).factors) s += static_cast<std::size_t>(d - 1);
  return s;
}

std::optional<std::size_t> group_algebra_upper_bound(const AbelianShape& g) {
  const std::int64_t p = g.p_group_prime();
  if (p == 0) return std::nullopt;
  const GroupIndex gi(g);
  if (gi.size > 512) throw BudgetExceeded("group-algebra bound supports groups of order <= 512");
  const std::size_t size = gi.size;
  std::vector<std::vector<std::size_t>> shift_by_unit;
  for (std::size_t axis = 0; axis < gi.factors.size(); ++axis) {
    std::vector<std::size_t> perm(size);
    const std::size_t u = gi.unit(axis);
    for (std::size_t h = 0; h < size; ++h) perm[h] = gi.add(h, u);
    shift_by_unit.push_back(std::move(perm));
  }

  // Row-reduced basis of I^k over F_p, starting from the whole algebra.
  using Vec = std::vector<std::int64_t>;
  auto reduce_basis = [&](std::vector<Vec> rows) {
    std::vector<Vec> basis;
    std::size_t col = 0;
    for (std::size_t r = 0; r < rows.size() && col < size;) {
      std::size_t piv = r;
      while (piv < rows.size() && rows[piv][col] == 0) ++piv;
      if (piv == rows.size()) {
        ++col;
        continue;
      }
      std::swap(rows[r], rows[piv]);
      std::int64_t s = 0, t = 0;
      ext_gcd(rows[r][col], p, s, t);
      const std::int64_t inv = ((s % p) + p) % p;
      for (auto& x : rows[r]) x = x * inv % p;
      for (std::size_t k = 0; k < rows.size(); ++k) {
        if (k == r || rows[k][col] == 0) continue;
        const std::int64_t f = rows[k][col];
        for (std::size_t c = 0; c < size; ++c) rows[k][c] = ((rows[k][c] - f * rows[r][c]) % p + p) % p;
      }
      basis.push_back(rows[r]);
      ++r;
      ++col;
    }
    return basis;
  };

  std::vector<Vec> current;
  for (std::size_t h = 0; h < size; ++h) {
    Vec e(size, 0);
    e[h] = 1;
    current.push_back(std::move(e));
  }
  std::size_t k = 0;
  while (!current.empty()) {
    std::vector<Vec> next;
    for (const Vec& v : current)
      for (const auto& perm : shift_by_unit) {
        Vec w(size);
        for (std::size_t h = 0; h < size; ++h) w[h] = v[h];
        for (std::size_t h = 0; h < size; ++h) w[perm[h]] = (w[perm[h]] - v[h] + p) % p;
        if (std::any_of(w.begin(), w.end(), [](std::int64_t x) { return x != 0; })) next.push_back(std::move(w));
      }
    current = reduce_basis(std::move(next));
    ++k;
  }
  // I^k = 0 with k minimal; any product of k elements of I vanishes, so a
  // zero-sum-free sequence has length at most k - 1.
  return k - 1;
}

DavenportResult davenport_exact(const AbelianShape& g, const DavenportOptions& options) {
  const GroupIndex gi(g);
  if (gi.size == 1) return DavenportResult{0, {}, "trivial", 0};
  if (options.use_group_algebra && invariant_factors(g).factors.size() <= 2) {
    // Groups of rank at most two: d(Z_a x Z_b) = a + b - 2 for a | b.
    return DavenportResult{davenport_lower_bound(g), standard_witness(g), "rank-two", 0};
  }
  if (options.use_group_algebra) {
    if (auto upper = group_algebra_upper_bound(g); upper && *upper == davenport_lower_bound(g)) {
      DavenportResult res;
      res.value = *upper;
      res.witness = standard_witness(g);
      res.method = "group-algebra";
      return res;
    }
  }
  return search_davenport(g, options);
}

double davenport_bound(const AbelianShape& g) {
  if (g.is_trivial()) throw PreconditionError("the bound needs a nontrivial group");
  const double e = static_cast<double>(g.exponent());
  return (e - 1.0) + e * std::log2(static_cast<double>(g.order()) / e);
}

AbelianShape LinearSystem::column_group() const {
  AbelianShape s;
  for (const auto& c : constraints) s.factors.push_back(c.q);
  return s;
}

namespace {

void validate_system(const LinearSystem& sys) {
  for (const auto& c : sys.constraints) {
    if (c.q < 2) throw PreconditionError("constraint modulus must be at least 2");
    if (c.v.size() != sys.n) {
      throw PreconditionError("constraint vector has length " + std::to_string(c.v.size()) + " but n = " +
                              std::to_string(sys.n));
    }
  }
}

// Key of the partial sums (one residue per constraint) in mixed radix.
struct KeyPacker {
  std::vector<std::uint64_t> radix;

  explicit KeyPacker(const LinearSystem& sys) {
    long double space = 1;
    for (const auto& c : sys.constraints) {
      radix.push_back(static_cast<std::uint64_t>(c.q));
      space *= static_cast<long double>(c.q);
    }
    if (space > static_cast<long double>(std::uint64_t{1} << 62)) {
      throw BudgetExceeded("the constraint value space exceeds 2^62 keys");
    }
  }
};

std::vector<std::uint64_t> half_keys(const LinearSystem& sys, std::size_t begin, std::size_t end, bool negate) {
  const std::size_t r = sys.constraints.size(), len = end - begin;
  std::vector<std::int64_t> acc(r, 0);
  std::vector<std::uint64_t> keys;
  keys.reserve(std::size_t{1} << len);
  auto pack = [&]() {
    std::uint64_t key = 0;
    for (std::size_t c = 0; c < r; ++c) {
      const std::int64_t q = sys.constraints[c].q;
      const std::int64_t v = negate ? (q - acc[c]) % q : acc[c];
      key = key * static_cast<std::uint64_t>(q) + static_cast<std::uint64_t>(v);
    }
    return key;
  };
  keys.push_back(pack());
  std::uint64_t gray = 0;
  for (std::uint64_t step = 1; step < (std::uint64_t{1} << len); ++step) {
    const auto j = static_cast<std::size_t>(__builtin_ctzll(step));
    gray ^= std::uint64_t{1} << j;
    const bool on = (gray >> j) & 1;
    for (std::size_t c = 0; c < r; ++c) {
      const std::int64_t q = sys.constraints[c].q;
      const std::int64_t a = ((sys.constraints[c].v[begin + j] % q) + q) % q;
      acc[c] = on ? (acc[c] + a) % q : (acc[c] - a + q) % q;
    }
    keys.push_back(pack());
  }
  return keys;
}

}  // namespace

std::uint64_t count_boolean_solutions(const LinearSystem& sys, const CountOptions& options) {
  validate_system(sys);
  if (sys.n > options.max_n || sys.n > 48) {
    throw BudgetExceeded("boolean solution counting supports n <= " + std::to_string(std::min<std::size_t>(options.max_n, 48)));
  }
  KeyPacker packer(sys);
  if (sys.constraints.empty()) return std::uint64_t{1} << sys.n;
  const std::size_t half = sys.n / 2;
  std::vector<std::uint64_t> left = half_keys(sys, 0, half, false);
  std::vector<std::uint64_t> right = half_keys(sys, half, sys.n, true);
  std::sort(left.begin(), left.end());
  std::sort(right.begin(), right.end());
  std::uint64_t total = 0;
  std::size_t i = 0, j = 0;
  while (i < left.size() && j < right.size()) {
    if (left[i] < right[j]) {
      ++i;
    } else if (right[j] < left[i]) {
      ++j;
    } else {
      const std::uint64_t key = left[i];
      std::uint64_t a = 0, b = 0;
      while (i < left.size() && left[i] == key) ++i, ++a;
      while (j < right.size() && right[j] == key) ++j, ++b;
      total += a * b;
    }
  }
  return total;
}

std::size_t solution_covering_radius(const LinearSystem& sys) {
  validate_system(sys);
  if (sys.n > 24) throw BudgetExceeded("covering radius computation supports n <= 24");
  const std::size_t points = std::size_t{1} << sys.n;
  constexpr std::uint8_t kUnseen = 0xFF;
  std::vector<std::uint8_t> dist(points, kUnseen);
  std::deque<std::uint32_t> queue;
  for (std::size_t x = 0; x < points; ++x) {
    bool ok = true;
    for (const auto& c : sys.constraints) {
      std::int64_t acc = 0;
      for (std::size_t i = 0; i < sys.n; ++i)
        if ((x >> i) & 1) acc += c.v[i];
      if (((acc % c.q) + c.q) % c.q != 0) {
        ok = false;
        break;
      }
    }
    if (ok) {
      dist[x] = 0;
      queue.push_back(static_cast<std::uint32_t>(x));
    }
  }
  std::size_t radius = 0;
  while (!queue.empty()) {
    const std::uint32_t x = queue.front();
    queue.pop_front();
    radius = std::max<std::size_t>(radius, dist[x]);
    for (std::size_t i = 0; i < sys.n; ++i) {
      const std::uint32_t y = x ^ (std::uint32_t{1} << i);
      if (dist[y] == kUnseen) {
        dist[y] = static_cast<std::uint8_t>(dist[x] + 1);
        queue.push_back(y);
      }
    }
  }
  return radius;
}

SolutionBoundsReport solution_bounds_check(const LinearSystem& sys, std::int64_t m, const DavenportOptions& davenport) {
  validate_system(sys);
  const Modulus mod = Modulus::of(m);
  for (const auto& c : sys.constraints) {
    if (!mod.fully_divided_by(c.q)) {
      throw PreconditionError("constraint modulus " + std::to_string(c.q) + " is not a prime power fully dividing m = " +
                              std::to_string(m));
    }
  }
  SolutionBoundsReport rep;
  rep.n = sys.n;
  rep.r = sys.constraints.size();
  rep.m = m;
  rep.count = count_boolean_solutions(sys);
  const double n = static_cast<double>(sys.n);
  const double log_m = std::log2(static_cast<double>(m));
  const double log_n = sys.n > 0 ? std::log2(n) : 0.0;
  const double r = static_cast<double>(rep.r);
  rep.rank_bound = std::exp2(n - static_cast<double>(m) * r * log_m * log_n);
  rep.rank_bound_holds = static_cast<double>(rep.count) >= rep.rank_bound;
  rep.two_solution_threshold = static_cast<double>(m) * r * log_m;
  rep.two_solutions_required = n >= rep.two_solution_threshold;
  rep.two_solutions_hold = !rep.two_solutions_required || rep.count >= 2;

  const AbelianShape g = sys.column_group();
  try {
    const auto d = davenport_exact(g, davenport);
    rep.davenport = d.value;
    rep.davenport_method = d.method;
  } catch (const BudgetExceeded&) {
    rep.davenport = static_cast<std::size_t>(std::floor(davenport_bound(g)));
    rep.davenport_method = "upper-bound";
  }
  const std::size_t d = *rep.davenport;
  double ball = 0.0, binom = 1.0;
  for (std::size_t k = 0; k <= std::min(d, sys.n); ++k) {
    ball += binom;
    binom = binom * (n - static_cast<double>(k)) / static_cast<double>(k + 1);
  }
  rep.ball_bound = std::exp2(n) / ball;
  rep.log_ball_bound = std::exp2(n - (static_cast<double>(d) + 1.0) * log_n);
  rep.ball_bound_holds =
      static_cast<double>(rep.count) >= rep.ball_bound && static_cast<double>(rep.count) >= rep.log_ball_bound;
  if (sys.n <= 20) {
    rep.covering_radius = solution_covering_radius(sys);
    rep.covering_holds = *rep.covering_radius <= d;
  }
  return rep;
}

}  // namespace modquad
