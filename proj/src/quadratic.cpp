#include "modquad/quadratic.hpp"

#include <algorithm>
#include <array>
#include <bitset>
#include <string>

#include "modquad/errors.hpp"
#include "modquad/rigidity.hpp"

namespace modquad {

QuadPoly::QuadPoly(Modulus modulus, std::size_t n)
    : modulus_(std::move(modulus)), n_(n), linear_(n, 0), quad_(n * n, 0) {}

QuadPoly QuadPoly::from_terms(Modulus modulus, std::size_t n, std::int64_t c, std::span<const std::int64_t> linear,
                              std::span<const QuadTerm> terms) {
  if (!linear.empty() && linear.size() != n) {
    throw PreconditionError("linear coefficient count " + std::to_string(linear.size()) + " does not match n = " +
                            std::to_string(n));
  }
  QuadPoly f(std::move(modulus), n);
  f.set_constant(c);
  for (std::size_t i = 0; i < linear.size(); ++i) f.set_linear(i, linear[i]);
  for (const auto& t : terms) f.add_term(t.i, t.j, t.coef);
  return f;
}

void QuadPoly::set_quad(std::size_t i, std::size_t j, std::int64_t a) {
  if (i >= n_ || j >= n_ || i == j) throw PreconditionError("quadratic index out of range or on the diagonal");
  const Residue r = modulus_.reduce(a);
  quad_[i * n_ + j] = r;
  quad_[j * n_ + i] = r;
}

void QuadPoly::add_term(std::size_t i, std::size_t j, std::int64_t a) {
  if (i >= n_ || j >= n_) {
    throw PreconditionError("variable index " + std::to_string(std::max(i, j) + 1) + " exceeds n = " +
                            std::to_string(n_));
  }
  const Residue r = modulus_.reduce(a);
  if (i == j) {
    linear_[i] = modulus_.add(linear_[i], r);
    return;
  }
  set_quad(i, j, modulus_.add(quad_[i * n_ + j], r));
}

std::vector<QuadTerm> QuadPoly::quad_terms() const {
  std::vector<QuadTerm> out;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j)
      if (quad_[i * n_ + j] != 0) out.push_back({i, j, quad_[i * n_ + j]});
  return out;
}

bool QuadPoly::has_quadratic_part() const {
  return std::any_of(quad_.begin(), quad_.end(), [](Residue r) { return r != 0; });
}

bool QuadPoly::is_constant() const {
  return !has_quadratic_part() && std::all_of(linear_.begin(), linear_.end(), [](Residue r) { return r == 0; });
}

Residue QuadPoly::evaluate(std::span<const std::uint8_t> x) const {
  if (x.size() != n_) {
    throw PreconditionError("point has length " + std::to_string(x.size()) + " but n = " + std::to_string(n_));
  }
  std::int64_t acc = c_;
  for (std::size_t i = 0; i < n_; ++i) {
    if (!x[i]) continue;
    acc += linear_[i];
    for (std::size_t j = i + 1; j < n_; ++j)
      if (x[j]) acc += quad_[i * n_ + j];
    acc %= modulus_.value();
  }
  return modulus_.reduce(acc);
}

Residue QuadPoly::evaluate_bits(std::uint64_t bits) const {
  if (n_ > 64) throw PreconditionError("evaluate_bits supports at most 64 variables");
  std::int64_t acc = c_;
  for (std::uint64_t rest = bits; rest != 0; rest &= rest - 1) {
    const auto i = static_cast<std::size_t>(__builtin_ctzll(rest));
    if (i >= n_) break;
    acc += linear_[i];
    for (std::uint64_t higher = rest & (rest - 1); higher != 0; higher &= higher - 1) {
      const auto j = static_cast<std::size_t>(__builtin_ctzll(higher));
      if (j >= n_) break;
      acc += quad_[i * n_ + j];
    }
    acc %= modulus_.value();
  }
  return modulus_.reduce(acc);
}

QuadPoly QuadPoly::reduce_mod(std::int64_t divisor) const {
  if (divisor < 1 || modulus_.value() % divisor != 0) {
    throw PreconditionError(std::to_string(divisor) + " does not divide m = " + std::to_string(modulus_.value()));
  }
  if (divisor == 1) throw PreconditionError("reduction modulus must be at least 2");
  QuadPoly out(Modulus::of(divisor), n_);
  out.c_ = c_ % divisor;
  for (std::size_t i = 0; i < n_; ++i) out.linear_[i] = linear_[i] % divisor;
  for (std::size_t k = 0; k < quad_.size(); ++k) out.quad_[k] = quad_[k] % divisor;
  return out;
}

QuadPoly QuadPoly::scaled(std::int64_t k) const {
  QuadPoly out(modulus_, n_);
  const Residue kk = modulus_.reduce(k);
  out.c_ = modulus_.mul(c_, kk);
  for (std::size_t i = 0; i < n_; ++i) out.linear_[i] = modulus_.mul(linear_[i], kk);
  for (std::size_t t = 0; t < quad_.size(); ++t) out.quad_[t] = modulus_.mul(quad_[t], kk);
  return out;
}

QuadPoly QuadPoly::doubled() const {
  QuadPoly out(Modulus::of(2 * modulus_.value()), n_);
  out.c_ = 2 * c_;
  for (std::size_t i = 0; i < n_; ++i) out.linear_[i] = 2 * linear_[i];
  for (std::size_t t = 0; t < quad_.size(); ++t) out.quad_[t] = 2 * quad_[t];
  return out;
}

bool operator==(const QuadPoly& a, const QuadPoly& b) {
  return a.modulus_ == b.modulus_ && a.n_ == b.n_ && a.c_ == b.c_ && a.linear_ == b.linear_ && a.quad_ == b.quad_;
}

QuadPoly fold_boolean(const ExtendedQuadPoly& f) {
  return QuadPoly::from_terms(f.modulus, f.n, f.c, f.linear, f.terms);
}

AssocMatrix assoc_matrix(const QuadPoly& f) {
  const Modulus& mod = f.modulus();
  const std::size_t n = f.n();
  const auto terms = f.quad_terms();
  const bool all_even = std::all_of(terms.begin(), terms.end(), [](const QuadTerm& t) { return t.coef % 2 == 0; });
  if (mod.is_odd() || all_even) {
    ZmMatrix a(mod, n, n);
    const Residue half = mod.is_odd() ? (mod.value() + 1) / 2 : 0;
    for (std::size_t i = 0; i < n; ++i) a(i, i) = f.linear(i);
    for (const auto& t : terms) {
      const Residue v = mod.is_odd() ? mod.mul(t.coef, half) : t.coef / 2;
      a(t.i, t.j) = v;
      a(t.j, t.i) = v;
    }
    return AssocMatrix{std::move(a), mod, false};
  }
  const Modulus big = Modulus::of(2 * mod.value());
  ZmMatrix a(big, n, n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = 2 * f.linear(i);
  for (const auto& t : terms) {
    a(t.i, t.j) = t.coef;
    a(t.j, t.i) = t.coef;
  }
  return AssocMatrix{std::move(a), big, true};
}

std::size_t form_rank(const QuadPoly& f) {
  const Modulus& mod = f.modulus();
  if (!mod.is_prime_power()) {
    throw PreconditionError("prime-power required: form rank needs m = p^k, got m = " + std::to_string(mod.value()));
  }
  if (!mod.is_odd()) {
    const auto terms = f.quad_terms();
    const bool even = std::all_of(f.linear().begin(), f.linear().end(), [](Residue r) { return r % 2 == 0; }) &&
                      std::all_of(terms.begin(), terms.end(), [](const QuadTerm& t) { return t.coef % 2 == 0; });
    if (!even) throw PreconditionError("form rank over an even modulus requires all coefficients to be even");
  }
  return rank(assoc_matrix(f).A);
}

BooleanRankBound brank_upper(const QuadPoly& f, const BrankOptions& options) {
  AssocMatrix am = assoc_matrix(f);
  if (!am.A.modulus().is_prime_power()) {
    throw PreconditionError("prime-power required: brank bound needs m = p^k, got m = " +
                            std::to_string(f.modulus().value()));
  }
  RigidityOptions ro;
  ro.exact_budget = options.exact_budget;
  ro.samples = options.samples;
  ro.seed = options.seed;
  ro.workers = options.workers;
  const RigidityReport rep = min_diag_rank(am.A, ro);
  BooleanRankBound out;
  out.lower = f.is_constant() ? 0 : 1;
  out.upper = 1 + rep.min_rank;
  out.witness_diagonal = rep.witness_diagonal;
  out.exact_minimum = rep.exact;
  out.doubled = am.doubled;
  out.effective_modulus = am.effective_modulus.value();
  return out;
}

BrankWitness brank_exact_tiny(const QuadPoly& f) {
  const std::size_t n = f.n();
  const std::int64_t m = f.modulus().value();
  if (n > 4 || m > 4) {
    throw BudgetExceeded("exact boolean rank search supports n <= 4 and m <= 4, got n = " + std::to_string(n) +
                         ", m = " + std::to_string(m));
  }
  const std::size_t points = std::size_t{1} << n;
  std::vector<Residue> values(points);
  for (std::size_t x = 0; x < points; ++x) values[x] = f.evaluate_bits(x);

  // Pairs of cube points (x < y) indexed into a 128-bit set.
  using PairSet = std::bitset<128>;
  auto pair_index = [points](std::size_t x, std::size_t y) { return x * (2 * points - x - 1) / 2 + (y - x - 1); };
  PairSet conflicts;
  for (std::size_t x = 0; x < points; ++x)
    for (std::size_t y = x + 1; y < points; ++y)
      if (values[x] != values[y]) conflicts.set(pair_index(x, y));

  BrankWitness out;
  if (conflicts.none()) return out;

  std::size_t vector_count = 1;
  for (std::size_t i = 0; i < n; ++i) vector_count *= static_cast<std::size_t>(m);
  std::vector<std::vector<Residue>> forms;
  std::vector<PairSet> separates;
  for (std::size_t code = 1; code < vector_count; ++code) {
    std::vector<Residue> v(n);
    std::size_t rest = code;
    for (std::size_t i = n; i-- > 0;) {
      v[i] = static_cast<Residue>(rest % static_cast<std::size_t>(m));
      rest /= static_cast<std::size_t>(m);
    }
    std::vector<Residue> proj(points);
    for (std::size_t x = 0; x < points; ++x) {
      Residue acc = 0;
      for (std::size_t i = 0; i < n; ++i)
        if ((x >> i) & 1) acc += v[i];
      proj[x] = acc % m;
    }
    PairSet sep;
    for (std::size_t x = 0; x < points; ++x)
      for (std::size_t y = x + 1; y < points; ++y)
        if (proj[x] != proj[y]) sep.set(pair_index(x, y));
    sep &= conflicts;
    if (std::find(separates.begin(), separates.end(), sep) != separates.end()) continue;
    separates.push_back(sep);
    forms.push_back(std::move(v));
  }

  const std::size_t count = forms.size();
  for (std::size_t r = 1; r < n; ++r) {
    std::vector<std::size_t> pick(r);
    for (std::size_t i = 0; i < r; ++i) pick[i] = i;
    if (r > count) break;
    for (;;) {
      PairSet cover;
      for (std::size_t i : pick) cover |= separates[i];
      if ((cover & conflicts) == conflicts) {
        out.rank = r;
        for (std::size_t i : pick) out.forms.push_back(forms[i]);
        return out;
      }
      std::size_t k = r;
      while (k > 0 && pick[k - 1] == count - r + (k - 1)) --k;
      if (k == 0) break;
      ++pick[k - 1];
      for (std::size_t i = k; i < r; ++i) pick[i] = pick[i - 1] + 1;
    }
  }
  out.rank = n;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Residue> e(n, 0);
    e[i] = 1;
    out.forms.push_back(std::move(e));
  }
  return out;
}

}  // namespace modquad
