#include "modquad/modulus.hpp"

#include <numeric>
#include <string>

#include "modquad/errors.hpp"

namespace modquad {

std::int64_t PrimePower::value() const {
  std::int64_t v = 1;
  for (int i = 0; i < exponent; ++i) v *= prime;
  return v;
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) { return std::gcd(a, b); }

std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& s, std::int64_t& t) {
  std::int64_t old_r = a, r = b;
  std::int64_t old_s = 1, cur_s = 0;
  std::int64_t old_t = 0, cur_t = 1;
  while (r != 0) {
    std::int64_t q = old_r / r;
    std::int64_t tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * cur_s;
    old_s = cur_s;
    cur_s = tmp;
    tmp = old_t - q * cur_t;
    old_t = cur_t;
    cur_t = tmp;
  }
  s = old_s;
  t = old_t;
  return old_r;
}

std::vector<PrimePower> factorize(std::int64_t m) {
  std::vector<PrimePower> out;
  for (std::int64_t p = 2; p * p <= m; ++p) {
    if (m % p != 0) continue;
    int e = 0;
    while (m % p == 0) {
      m /= p;
      ++e;
    }
    out.push_back({p, e});
  }
  if (m > 1) out.push_back({m, 1});
  return out;
}

Modulus Modulus::of(std::int64_t m) {
  if (m < 2 || m > kMaxValue) {
    throw PreconditionError("modulus must lie in [2, 2^31 - 1], got " + std::to_string(m));
  }
  Modulus out;
  out.m_ = m;
  out.factors_ = factorize(m);
  return out;
}

Modulus::Modulus(std::int64_t m, std::vector<PrimePower> factorization)
    : m_(m), factors_(std::move(factorization)) {
  if (m < 2 || m > kMaxValue) {
    throw PreconditionError("modulus must lie in [2, 2^31 - 1], got " + std::to_string(m));
  }
  std::int64_t product = 1;
  std::int64_t last = 1;
  for (const auto& pp : factors_) {
    if (pp.exponent < 1 || pp.prime <= last) {
      throw PreconditionError("factorization must list strictly increasing primes with exponents >= 1");
    }
    if (factorize(pp.prime).size() != 1 || factorize(pp.prime)[0].exponent != 1) {
      throw PreconditionError("factorization entry " + std::to_string(pp.prime) + " is not prime");
    }
    last = pp.prime;
    product *= pp.value();
  }
  if (product != m) {
    throw PreconditionError("factorization does not multiply to " + std::to_string(m));
  }
}

bool Modulus::is_unit(Residue a) const { return std::gcd(reduce(a), m_) == 1; }

Residue Modulus::inverse(Residue a) const {
  std::int64_t s = 0, t = 0;
  std::int64_t g = ext_gcd(reduce(a), m_, s, t);
  if (g != 1) throw PreconditionError(std::to_string(a) + " is not a unit mod " + std::to_string(m_));
  return reduce(s);
}

bool Modulus::fully_divided_by(std::int64_t q) const {
  for (const auto& pp : factors_) {
    if (pp.value() == q) return true;
  }
  return false;
}

}  // namespace modquad
