#pragma once

// Exact linear algebra over Z_m for composite m: Smith normal form,
// invariant-factor shapes of row/column spaces, left nullspaces, and
// extraction of full-rank square submatrices.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "modquad/modulus.hpp"

namespace modquad {

class ZmMatrix {
 public:
  ZmMatrix(Modulus modulus, std::size_t rows, std::size_t cols);
  /// Entries are row-major and must already lie in [0, m).
  ZmMatrix(Modulus modulus, std::size_t rows, std::size_t cols, std::vector<Residue> entries);

  /// Reduces arbitrary integers into [0, m).
  static ZmMatrix from_integers(Modulus modulus, std::size_t rows, std::size_t cols,
                                std::span<const std::int64_t> values);
  static ZmMatrix identity(Modulus modulus, std::size_t n);
  static ZmMatrix diagonal(Modulus modulus, std::span<const Residue> diag);

  const Modulus& modulus() const noexcept { return modulus_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const std::vector<Residue>& entries() const noexcept { return entries_; }

  Residue operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  Residue& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }

  std::span<const Residue> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }

  ZmMatrix transpose() const;
  ZmMatrix submatrix(std::span<const std::size_t> row_idx, std::span<const std::size_t> col_idx) const;
  /// Rows selected in the given order, all columns kept.
  ZmMatrix select_rows(std::span<const std::size_t> row_idx) const;

  bool is_symmetric() const;
  bool is_square() const noexcept { return rows_ == cols_; }
  bool is_zero() const;

  /// A + diag(d); requires a square matrix and |d| = rows.
  ZmMatrix plus_diagonal(std::span<const Residue> d) const;

  /// det(A) is a unit mod m, checked one prime at a time.
  bool is_invertible() const;

  friend ZmMatrix operator*(const ZmMatrix& a, const ZmMatrix& b);
  friend ZmMatrix operator+(const ZmMatrix& a, const ZmMatrix& b);
  friend bool operator==(const ZmMatrix& a, const ZmMatrix& b);

  /// v^T A for a row vector v of length rows().
  std::vector<Residue> left_multiply(std::span<const Residue> v) const;
  /// A w for a column vector w of length cols().
  std::vector<Residue> right_multiply(std::span<const Residue> w) const;

 private:
  Modulus modulus_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Residue> entries_;
};

/// Invariant factors d_1 | d_2 | ... | d_r (all >= 2) of a finite abelian
/// group Z_{d_1} x ... x Z_{d_r}. Stored ascending; the trivial group is the
/// empty list.
struct GroupShape {
  std::vector<std::int64_t> factors;

  std::size_t rank() const noexcept { return factors.size(); }
  /// Group order; saturates at the maximum representable value.
  unsigned __int128 order() const;
  friend bool operator==(const GroupShape&, const GroupShape&) = default;
};

/// P * A * Q = D with P, Q invertible and D diagonal. Diagonal entries are
/// normalized to divisors of m (0 where the diagonal vanishes), forming a
/// divisibility chain down the diagonal.
struct SmithDecomposition {
  ZmMatrix P;
  ZmMatrix Q;
  ZmMatrix D;

  /// gcd(D_ii, m) for i < min(rows, cols); m marks a zero entry.
  std::vector<std::int64_t> diagonal_gcds() const;
};

enum class Side { Row, Column };

SmithDecomposition smith_normal_form(const ZmMatrix& a);

GroupShape group_shape(const ZmMatrix& a, Side side = Side::Column);

/// Number of invariant factors of the column space (= row space).
std::size_t rank(const ZmMatrix& a);

/// Generators (as rows) of { v : v^T A = 0 }. Each generator is listed with
/// the order of the cyclic subgroup it spans, and the group is the direct
/// sum of those cyclic subgroups.
struct Nullspace {
  ZmMatrix generators;
  std::vector<std::int64_t> orders;
};
Nullspace left_nullspace_with_orders(const ZmMatrix& a);
ZmMatrix left_nullspace(const ZmMatrix& a);

/// Some a with a^T M = b^T, or nullopt when b is not in the row space.
std::optional<std::vector<Residue>> solve_left(const ZmMatrix& m, std::span<const Residue> b);

/// Lexicographically least a with a^T M = b^T. Enumerates the coset of the
/// left nullspace when it has at most `enumeration_limit` elements;
/// otherwise returns the canonical particular solution.
std::optional<std::vector<Residue>> solve_left_lex_least(const ZmMatrix& m, std::span<const Residue> b,
                                                         std::uint64_t enumeration_limit = 1u << 20);

/// Index sets (I1, I2) with |I1| = |I2| = rank(A) such that A restricted to
/// I1 x I2 has the same group shape as A and the rows I1 span the row
/// space. Requires a prime-power modulus.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> full_rank_submatrix(const ZmMatrix& a);

/// Rows (in the order given by `candidates`) chosen greedily so that each
/// step maximizes the order of the span; stops once the span equals the
/// span of all candidates. Ties go to the earliest candidate.
std::vector<std::size_t> spanning_rows(const ZmMatrix& a, std::span<const std::size_t> candidates);

namespace detail {
/// Rank of a row-major rows x cols buffer; the buffer is overwritten.
std::size_t rank_destructive(const Modulus& modulus, std::size_t rows, std::size_t cols,
                             std::vector<Residue>& entries);
}  // namespace detail

}  // namespace modquad
