#pragma once

// Matching vector families obtained from OR-representing polynomials, and
// Cayley graphs on the cube defined by the zero sets of polynomials.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "modquad/quadratic.hpp"

namespace modquad {

/// Lists S and T of N vectors in Z_m^dim with <S_i, T_i> = 0 and
/// <S_i, T_j> != 0 for i != j.
struct MvfFamily {
  std::int64_t modulus = 0;
  std::size_t dim = 0;
  std::vector<std::vector<Residue>> S;
  std::vector<std::vector<Residue>> T;
  /// Cube point behind each list entry (x for S_i, y for T_i).
  std::vector<std::uint64_t> s_points;
  std::vector<std::uint64_t> t_points;
  /// The (alpha, beta) monomial x^alpha y^beta behind each coordinate.
  std::vector<std::pair<std::uint64_t, std::uint64_t>> basis;
};

/// f evaluated at z_i = 2 x_i y_i - x_i - y_i + 1, expanded into the
/// monomials x^alpha y^beta with nonzero coefficients. Keys are bitmasks
/// (alpha, beta) sorted lexicographically.
std::vector<std::pair<std::pair<std::uint64_t, std::uint64_t>, Residue>> substituted_expansion(const QuadPoly& f);

/// Builds the family from a polynomial that weakly represents OR. The
/// substitution vanishes exactly when y is the complement of x, so S_i
/// comes from the point x_i and T_i from its complement.
MvfFamily mvf_from_or_poly(const QuadPoly& f);

struct MvfVerification {
  bool ok = true;
  std::optional<std::pair<std::size_t, std::size_t>> violation;
  std::uint64_t products = 0;
};

/// Checks every pair (i, j); reports the lexicographically first violation.
MvfVerification verify_mvf(const MvfFamily& fam, unsigned workers = 1);

/// Simple graph on B^n where x ~ y iff every polynomial vanishes at x xor y.
class CubeGraph {
 public:
  CubeGraph(std::size_t n, const std::vector<QuadPoly>& predicates);

  std::size_t n() const noexcept { return n_; }
  std::size_t vertex_count() const noexcept { return std::size_t{1} << n_; }
  std::size_t words() const noexcept { return words_; }
  bool adjacent(std::size_t u, std::size_t v) const {
    return (adj_[u * words_ + v / 64] >> (v % 64)) & 1;
  }
  const std::uint64_t* row(std::size_t v) const { return adj_.data() + v * words_; }
  std::size_t degree(std::size_t v) const;
  std::uint64_t edge_count() const;
  /// Complement graph (no loops).
  CubeGraph complement() const;

  /// DIMACS edge format: "p edge V E" followed by "e u v" lines, 1-based.
  void write_dimacs(std::ostream& out) const;

 private:
  CubeGraph() = default;
  std::size_t n_ = 0;
  std::size_t words_ = 0;
  std::vector<std::uint64_t> adj_;
};

struct CliqueResult {
  std::size_t size = 0;
  std::vector<std::size_t> clique;
  std::size_t upper = 0;
  bool exact = false;
};

/// Branch and bound with greedy-coloring bounds, limited by a node budget.
CliqueResult max_clique(const CubeGraph& g, std::uint64_t node_budget = 50'000'000);

/// Clique number of a Cayley graph on the cube: 1 + the clique number of
/// the neighbourhood of 0.
CliqueResult cayley_clique(const CubeGraph& g, std::uint64_t node_budget = 50'000'000);

struct RamseyStats {
  std::size_t vertices = 0;
  std::uint64_t edges = 0;
  CliqueResult clique;
  CliqueResult independent;
};

/// Clique and independence numbers; exact search only when the vertex
/// count is at most exact_limit, otherwise greedy lower and degeneracy
/// upper bounds.
RamseyStats ramsey_graph_stats(const CubeGraph& g, std::size_t exact_limit = 1024,
                               std::uint64_t node_budget = 50'000'000);

}  // namespace modquad
