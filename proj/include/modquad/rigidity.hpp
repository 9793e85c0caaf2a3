#pragma once

// Diagonal rigidity of symmetric matrices over prime-power moduli: the
// minimum rank over diagonal perturbations, the largest off-diagonal block,
// the constructive low-rank diagonal, and the weight-tail experiment.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "modquad/errors.hpp"
#include "modquad/zmod_linalg.hpp"

namespace modquad {

/// A block A_{rows x cols} with disjoint index sets.
struct OffDiagonalBlock {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
  GroupShape shape;
  bool exhaustive = false;

  std::size_t rank() const noexcept { return shape.rank(); }
};

/// Orders blocks by (rank, group order, factor list); true when a beats b.
bool block_better(const GroupShape& a, const GroupShape& b);

struct OffDiagonalOptions {
  std::size_t exhaustive_max_n = 12;
  std::size_t restarts = 24;
  std::uint64_t seed = 1;
};

/// Disjoint (I1, I2) maximizing the shape of A_{I1 x I2}. Since shapes only
/// grow when rows or columns are added, the search runs over partitions of
/// [n]: all of them for n <= exhaustive_max_n, otherwise randomized
/// hill-climbing restarts (a lower bound only).
OffDiagonalBlock max_offdiag_rank(const ZmMatrix& a, const OffDiagonalOptions& options = {});

/// Thrown when a row outside the spanning set is not a combination of the
/// spanning rows; `better` is a partition with a strictly larger block.
class InfeasibleCombination : public Error {
 public:
  InfeasibleCombination(const std::string& what, OffDiagonalBlock better)
      : Error(what), better_(std::move(better)) {}
  const OffDiagonalBlock& better() const noexcept { return better_; }

 private:
  OffDiagonalBlock better_;
};

struct LowRankDiagonal {
  std::vector<Residue> diagonal;
  /// Indices whose diagonal entry the construction leaves unconstrained.
  std::vector<std::size_t> free_indices;
};

/// Builds D with rank(A + D) <= 4 s from a partition block of maximal shape.
/// Throws InfeasibleCombination if the block turns out not to be maximal.
LowRankDiagonal construct_low_rank_diagonal(const ZmMatrix& a, const OffDiagonalBlock& block);

struct ConstructionResult {
  LowRankDiagonal diagonal;
  OffDiagonalBlock block;
  std::size_t retries = 0;
};

/// max_offdiag_rank followed by the construction, retrying on improved
/// blocks until it succeeds.
ConstructionResult low_rank_diagonal(const ZmMatrix& a, const OffDiagonalOptions& options = {});

struct RigidityOptions {
  std::uint64_t exact_budget = 20'000'000;
  std::uint64_t samples = 2'000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  OffDiagonalOptions offdiag{};
};

struct RigidityReport {
  std::size_t min_rank = 0;
  std::vector<Residue> witness_diagonal;
  bool exact = false;
  std::size_t offdiag_rank = 0;
  OffDiagonalBlock offdiag_block;
  /// m^n, saturating at 2^64 - 1.
  std::uint64_t search_space = 0;
};

/// Minimum of rank(A + D) over diagonal D. Exhaustive (and exact) when
/// m^n fits the budget; otherwise an upper bound from sampling, the
/// construction, and local search, flagged exact only if it meets
/// offdiag_rank, which is always a valid lower bound.
RigidityReport min_diag_rank(const ZmMatrix& a, const RigidityOptions& options = {});

enum class TailMode { Exhaustive, MonteCarlo };

struct TailOptions {
  TailMode mode = TailMode::Exhaustive;
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 1;
};

struct TailResult {
  double empirical = 0.0;
  double bound = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
};

/// P(|v + A w|_0 <= t r) for w uniform on B^k, where k = cols(A), r is
/// the rank of A, and |.|_0 counts nonzero entries; bound = 2^{(t+H(t)-1)r}.
TailResult weight_tail_experiment(const ZmMatrix& a, std::span<const Residue> v, double t,
                                  const TailOptions& options = {});

double binary_entropy(double t);

/// #{w in B^k : v + A w lies in the span of the given vectors}.
std::uint64_t count_in_span(const ZmMatrix& a, std::span<const Residue> v, const ZmMatrix& span_rows);

}  // namespace modquad
