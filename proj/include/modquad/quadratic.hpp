#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "modquad/modulus.hpp"
#include "modquad/zmod_linalg.hpp"

namespace modquad {

/// One monomial coef * x_i * x_j with 0-based indices. i == j denotes a
/// square term, which folds into a linear term on the boolean cube.
struct QuadTerm {
  std::size_t i = 0;
  std::size_t j = 0;
  Residue coef = 0;
  friend bool operator==(const QuadTerm&, const QuadTerm&) = default;
};

/// A quadratic polynomial over Z_m in n boolean variables, kept in the
/// folded normal form: constant, linear coefficients, and strictly upper
/// quadratic coefficients.
class QuadPoly {
 public:
  QuadPoly(Modulus modulus, std::size_t n);

  /// Builds the folded polynomial c + sum linear_i x_i + sum terms. Terms
  /// may repeat, appear in either index order, or be squares.
  static QuadPoly from_terms(Modulus modulus, std::size_t n, std::int64_t c,
                             std::span<const std::int64_t> linear, std::span<const QuadTerm> terms);

  const Modulus& modulus() const noexcept { return modulus_; }
  std::size_t n() const noexcept { return n_; }
  Residue constant() const noexcept { return c_; }
  Residue linear(std::size_t i) const { return linear_[i]; }
  const std::vector<Residue>& linear() const noexcept { return linear_; }
  /// Coefficient of x_i x_j for i != j (order-insensitive).
  Residue quad(std::size_t i, std::size_t j) const { return quad_[i * n_ + j]; }

  void set_constant(std::int64_t c) { c_ = modulus_.reduce(c); }
  void set_linear(std::size_t i, std::int64_t a) { linear_[i] = modulus_.reduce(a); }
  void set_quad(std::size_t i, std::size_t j, std::int64_t a);
  /// Adds a monomial; squares go to the linear part.
  void add_term(std::size_t i, std::size_t j, std::int64_t a);

  /// Nonzero quadratic terms with i < j, in lexicographic order.
  std::vector<QuadTerm> quad_terms() const;
  bool has_quadratic_part() const;
  bool is_constant() const;

  /// f(x) for x given as a 0/1 vector.
  Residue evaluate(std::span<const std::uint8_t> x) const;
  /// f(x) where bit i of `bits` is x_{i+1}; n must be at most 64.
  Residue evaluate_bits(std::uint64_t bits) const;

  /// Coefficientwise reduction to a divisor of m.
  QuadPoly reduce_mod(std::int64_t divisor) const;
  /// k * f over the same modulus.
  QuadPoly scaled(std::int64_t k) const;
  /// 2f viewed over Z_{2m}.
  QuadPoly doubled() const;

  friend bool operator==(const QuadPoly& a, const QuadPoly& b);

 private:
  Modulus modulus_;
  std::size_t n_;
  Residue c_ = 0;
  std::vector<Residue> linear_;
  std::vector<Residue> quad_;  // symmetric n x n, zero diagonal
};

/// A polynomial that may still carry square terms x_i^2.
struct ExtendedQuadPoly {
  Modulus modulus;
  std::size_t n = 0;
  std::int64_t c = 0;
  std::vector<std::int64_t> linear;
  std::vector<QuadTerm> terms;
};

/// Uses x_i^2 = x_i on the cube to produce the canonical form.
QuadPoly fold_boolean(const ExtendedQuadPoly& f);

struct AssocMatrix {
  ZmMatrix A;
  Modulus effective_modulus;
  bool doubled = false;
};

/// Symmetric A with x^T A x = f(x) - f(0) on the cube (or 2(f(x) - f(0))
/// over Z_{2m} when m is even and some quadratic coefficient is odd).
/// Diagonal entries carry the linear coefficients.
AssocMatrix assoc_matrix(const QuadPoly& f);

/// Rank of the associated matrix of the quadratic form whose square
/// coefficients are f's linear coefficients. Requires a prime-power modulus,
/// and all coefficients even when m is even.
std::size_t form_rank(const QuadPoly& f);

struct BrankOptions {
  std::uint64_t exact_budget = 20'000'000;
  std::uint64_t samples = 2'000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct BooleanRankBound {
  std::size_t lower = 0;
  std::size_t upper = 0;
  std::vector<Residue> witness_diagonal;
  bool exact_minimum = false;
  bool doubled = false;
  std::int64_t effective_modulus = 0;
};

/// brank(f) <= 1 + min over diagonal D of rank(A_f + D).
BooleanRankBound brank_upper(const QuadPoly& f, const BrankOptions& options = {});

struct BrankWitness {
  std::size_t rank = 0;
  /// The linear forms v_1..v_r, each of length n.
  std::vector<std::vector<Residue>> forms;
};

/// Exact boolean rank by exhaustive search over sets of linear forms.
/// Requires n <= 4 and m <= 4.
BrankWitness brank_exact_tiny(const QuadPoly& f);

}  // namespace modquad
