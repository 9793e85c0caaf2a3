#pragma once

// Exact enumeration of quadratic polynomials over the boolean cube:
// residue histograms, OR checks, exponential sums and the identities
// built from them, Weyl differencing, and the OR-representation search.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "modquad/quadratic.hpp"

namespace modquad {

struct ResidueHistogram {
  std::int64_t modulus = 0;
  std::size_t n = 0;
  /// counts[y] = #{x in B^n : f(x) = y}
  std::vector<std::uint64_t> counts;

  std::uint64_t total() const;
  std::uint64_t zeros() const { return counts.empty() ? 0 : counts[0]; }
  friend bool operator==(const ResidueHistogram&, const ResidueHistogram&) = default;
};

struct HistogramOptions {
  std::size_t max_n = 30;
  /// 0 means one worker per hardware thread.
  unsigned workers = 1;
};

ResidueHistogram residue_histogram(const QuadPoly& f, const HistogramOptions& options = {});

/// f(0) = 0 and f(x) != 0 for every other cube point.
bool check_weak_or(const QuadPoly& f, const HistogramOptions& options = {});

/// Whether f weakly represents g, given as a truth table indexed by the
/// bitmask of x: some set of residues contains exactly the values f takes
/// where g = 0.
bool check_weak_representation(const QuadPoly& f, std::span<const std::uint8_t> g_table);

struct ExpSumValue {
  Residue j = 0;
  double real = 0.0;
  double imag = 0.0;
  bool derived_from_histogram = true;

  double magnitude() const;
};

/// e_m(k) = exp(2 pi i k / m) for k = 0..m-1.
std::vector<std::complex<double>> roots_of_unity(std::int64_t m);

/// (1/2^n) sum_y counts[y] e_m(j y).
ExpSumValue exp_sum(const ResidueHistogram& h, Residue j);
ExpSumValue exp_sum(const QuadPoly& f, Residue j, const HistogramOptions& options = {});

struct IdentityResiduals {
  std::int64_t m1 = 1;
  std::int64_t m2 = 1;
  double zero_fraction = 0.0;
  double residual_ct = 0.0;
  double residual_split = 0.0;
};

/// Residuals of the zero-count identity
///   zeros/2^n = 1/m + (1/m) sum_{j != 0} E e_m(j f)
/// and of its split form for m = m1 m2
///   zeros/2^n = (1/m) sum_{j : m1 does not divide j} E e_m(j f)
///               + (1/m1) #{x : f(x) = 0 mod m2} / 2^n.
IdentityResiduals verify_counting_identities(const QuadPoly& f, std::int64_t m1, std::int64_t m2,
                                             const HistogramOptions& options = {});

struct WeylOptions {
  std::size_t max_n = 20;
  /// Upper limit on 3^n, the number of difference vectors h.
  std::uint64_t max_differences = 43'046'721;  // 3^16
};

struct WeylResult {
  double lhs_sq = 0.0;
  double rhs = 0.0;
};

/// |E e_m(f)|^2 against (1/4^n) sum_h |sum_x e_m(Delta_h f(x))|, where h
/// ranges over {-1,0,1}^n and x over the points with x + h in B^n.
WeylResult weyl_difference_bound(const QuadPoly& f, const WeylOptions& options = {});

struct LinearSumResult {
  double exact_magnitude = 0.0;
  double bound = 0.0;
  std::size_t t = 0;
};

/// |E e_m(sum a_j x_j)| = prod |cos(pi a_j / m)| against (1 - 1/m^2)^t.
LinearSumResult linear_exp_sum(std::span<const Residue> coeffs, std::int64_t m);

enum class OrRestriction { All, Symmetric };
enum class SearchMode { First, Count, All };

struct OrSearchOptions {
  OrRestriction restriction = OrRestriction::All;
  SearchMode mode = SearchMode::First;
  /// Deduplicate under permutations of the variables (n <= 8).
  bool canonicalize = false;
  /// Maximum size of the candidate space.
  std::uint64_t budget = std::uint64_t{1} << 34;
  unsigned workers = 1;
};

struct OrSearchResult {
  std::uint64_t count = 0;
  std::vector<QuadPoly> found;
  std::uint64_t candidate_space = 0;
};

OrSearchResult search_or_quadratics(std::size_t n, std::int64_t m, const OrSearchOptions& options = {});

}  // namespace modquad
