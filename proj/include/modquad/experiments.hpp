#pragma once

// Seeded random instances and the batch sweeps used by the CLI and the
// acceptance harness.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "modquad/counting.hpp"
#include "modquad/quadratic.hpp"
#include "modquad/random.hpp"
#include "modquad/rigidity.hpp"
#include "modquad/zmod_linalg.hpp"

namespace modquad {

/// Every coefficient uniform in Z_m.
QuadPoly random_quadratic(Rng& rng, const Modulus& mod, std::size_t n);

/// Uniform symmetric n x n matrix; with `even_only`, entries are drawn from
/// the even residues.
ZmMatrix random_symmetric(Rng& rng, const Modulus& mod, std::size_t n, bool even_only = false);

ZmMatrix random_matrix(Rng& rng, const Modulus& mod, std::size_t rows, std::size_t cols);

/// sum_t c_t (v_t . x)^2 + (a few linear terms) + c, folded on the cube.
QuadPoly planted_rank_quadratic(Rng& rng, const Modulus& mod, std::size_t n, std::size_t planted_rank);

struct IdentitySweepOptions {
  std::size_t count = 1000;
  std::size_t max_n = 14;
  std::int64_t min_m = 2;
  std::int64_t max_m = 12;
  std::uint64_t seed = 1;
};

struct IdentitySweepResult {
  std::size_t polynomials = 0;
  std::size_t factorizations = 0;
  double max_residual_ct = 0.0;
  double max_residual_split = 0.0;
};

/// Checks both counting identities on seeded random quadratics, over every
/// ordered factorization m = m1 * m2.
IdentitySweepResult identity_sweep(const IdentitySweepOptions& options);

struct DichotomyOptions {
  std::size_t count = 500;
  std::size_t n = 16;
  std::int64_t m = 3;
  std::uint64_t seed = 1;
  std::size_t high_threshold = 4;
  std::size_t low_threshold = 1;
  RigidityOptions rigidity{.exact_budget = 0, .samples = 64};
  unsigned workers = 1;
};

struct DichotomyRecord {
  std::size_t planted_rank = 0;
  /// Certified: offdiag_lower <= min_diag_rank <= min_rank_upper.
  std::size_t min_rank_upper = 0;
  std::size_t offdiag_lower = 0;
  double magnitude = 0.0;  // |E e_m(f)|
};

struct DichotomyResult {
  std::vector<DichotomyRecord> records;
  std::size_t low_count = 0;
  std::size_t high_count = 0;
  double max_low = 0.0;
  double max_high = 0.0;
  /// max over the high bucket < max over the low bucket (both nonempty).
  bool separated = false;
};

/// Buckets seeded random quadratics by certified bounds on min_diag_rank of
/// their associated matrix and compares |E e_m(f)| across buckets.
DichotomyResult dichotomy_sweep(const DichotomyOptions& options);

}  // namespace modquad
