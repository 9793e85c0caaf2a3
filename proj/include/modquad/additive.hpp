#pragma once

// Zero-sum problems over finite abelian groups: Davenport constants (in
// the convention d(G) = D(G) - 1), boolean solution counts of modular
// linear systems, and the lower bounds derived from them.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "modquad/modulus.hpp"

namespace modquad {

/// Z_{d_1} x ... x Z_{d_r}; factors need not form a divisibility chain.
struct AbelianShape {
  std::vector<std::int64_t> factors;

  std::int64_t exponent() const;
  std::uint64_t order() const;
  bool is_trivial() const { return order() == 1; }
  /// The prime p if the order is a power of p (and > 1), otherwise 0.
  std::int64_t p_group_prime() const;
};

struct DavenportOptions {
  /// Maximum number of memoized subset-sum states in the search.
  std::uint64_t state_budget = 5'000'000;
  /// Use the closed forms (groups of rank at most two, and p-groups whose
  /// group-algebra bound meets the standard sequence) before searching.
  bool use_group_algebra = true;
};

struct DavenportResult {
  std::size_t value = 0;
  /// A zero-sum-free sequence of length `value`, each element given by
  /// its coordinates.
  std::vector<std::vector<std::int64_t>> witness;
  /// "rank-two" for groups of rank at most two, "group-algebra" when the
  /// explicit witness meets the group-algebra bound, "search" when found by
  /// exhaustive search.
  std::string method;
  std::uint64_t states = 0;
};

/// Longest sequence over G with no nonempty subsequence summing to zero.
/// Throws BudgetExceeded when neither certificate nor search succeeds.
DavenportResult davenport_exact(const AbelianShape& g, const DavenportOptions& options = {});

/// (e - 1) + e log2(|G| / e), with e the exponent of G.
double davenport_bound(const AbelianShape& g);

/// The same group as a divisibility chain n_1 | n_2 | ... of cyclic orders.
AbelianShape invariant_factors(const AbelianShape& g);

/// sum (n_i - 1) over the invariant factors: the length of the standard
/// zero-sum-free sequence.
std::size_t davenport_lower_bound(const AbelianShape& g);

/// For a p-group: (nilpotency index of the augmentation ideal of F_p[G]) - 1,
/// an upper bound on d(G). Returns nullopt for other groups.
std::optional<std::size_t> group_algebra_upper_bound(const AbelianShape& g);

/// v^T x = 0 over Z_q.
struct LinearConstraint {
  std::int64_t q = 2;
  std::vector<Residue> v;
};

struct LinearSystem {
  std::size_t n = 0;
  std::vector<LinearConstraint> constraints;

  /// The group prod Z_q over constraints in which the columns live.
  AbelianShape column_group() const;
};

struct CountOptions {
  std::size_t max_n = 40;
};

/// #{x in B^n : every constraint holds}, by meet in the middle.
std::uint64_t count_boolean_solutions(const LinearSystem& sys, const CountOptions& options = {});

/// Minimal Hamming distance from each cube point to a solution, maximized.
/// n <= 24.
std::size_t solution_covering_radius(const LinearSystem& sys);

struct SolutionBoundsReport {
  std::uint64_t count = 0;
  std::size_t n = 0;
  std::size_t r = 0;
  std::int64_t m = 0;
  double rank_bound = 0.0;  // 2^{n - m r log2 m log2 n}
  bool rank_bound_holds = false;
  double two_solution_threshold = 0.0;  // m r log2 m
  bool two_solutions_required = false;
  bool two_solutions_hold = true;
  std::optional<std::size_t> davenport;  // d of the column group, if known
  std::string davenport_method;
  double ball_bound = 0.0;      // 2^n / sum_{k <= d} C(n, k)
  double log_ball_bound = 0.0;  // 2^{n - (d + 1) log2 n}
  bool ball_bound_holds = true;
  std::optional<std::size_t> covering_radius;
  bool covering_holds = true;
};

/// Checks the exact count against the rank-based and Davenport-based
/// lower bounds. Every constraint modulus must be a prime power q with
/// q || m.
SolutionBoundsReport solution_bounds_check(const LinearSystem& sys, std::int64_t m,
                                           const DavenportOptions& davenport = {});

}  // namespace modquad
