#pragma once

#include <cstdint>
#include <vector>

namespace modquad {

using Residue = std::int64_t;

struct PrimePower {
  std::int64_t prime = 0;
  int exponent = 0;

  std::int64_t value() const;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// The ring Z_m together with the factorization of m.
///
/// m is capped at 2^31 - 1 so that products of two residues fit in an
/// int64_t without overflow.
class Modulus {
 public:
  static constexpr std::int64_t kMaxValue = (std::int64_t{1} << 31) - 1;

  /// Factors m by trial division.
  static Modulus of(std::int64_t m);

  /// Uses a caller-supplied factorization; it is validated against m.
  Modulus(std::int64_t m, std::vector<PrimePower> factorization);

  std::int64_t value() const noexcept { return m_; }
  const std::vector<PrimePower>& factorization() const noexcept { return factors_; }
  bool is_prime_power() const noexcept { return factors_.size() == 1; }
  bool is_odd() const noexcept { return (m_ & 1) != 0; }

  Residue reduce(std::int64_t x) const noexcept {
    Residue r = x % m_;
    return r < 0 ? r + m_ : r;
  }
  Residue add(Residue a, Residue b) const noexcept {
    Residue s = a + b;
    return s >= m_ ? s - m_ : s;
  }
  Residue sub(Residue a, Residue b) const noexcept {
    Residue s = a - b;
    return s < 0 ? s + m_ : s;
  }
  Residue neg(Residue a) const noexcept { return a == 0 ? 0 : m_ - a; }
  Residue mul(Residue a, Residue b) const noexcept { return (a * b) % m_; }

  /// Multiplicative inverse of a unit; throws PreconditionError otherwise.
  Residue inverse(Residue a) const;
  bool is_unit(Residue a) const;

  /// q || m: q is a prime power dividing m whose prime does not divide m / q.
  bool fully_divided_by(std::int64_t q) const;

  friend bool operator==(const Modulus& a, const Modulus& b) { return a.m_ == b.m_; }

 private:
  Modulus() = default;
  std::int64_t m_ = 0;
  std::vector<PrimePower> factors_;
};

std::int64_t gcd64(std::int64_t a, std::int64_t b);

/// Extended Euclid on non-negative integers: returns g and sets s, t with
/// s*a + t*b = g.
std::int64_t ext_gcd(std::int64_t a, std::int64_t b, std::int64_t& s, std::int64_t& t);

std::vector<PrimePower> factorize(std::int64_t m);

}  // namespace modquad
