#include "modquad/zmod_linalg.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "modquad/errors.hpp"

namespace modquad {

ZmMatrix::ZmMatrix(Modulus modulus, std::size_t rows, std::size_t cols)
    : modulus_(std::move(modulus)), rows_(rows), cols_(cols), entries_(rows * cols, 0) {}

ZmMatrix::ZmMatrix(Modulus modulus, std::size_t rows, std::size_t cols, std::vector<Residue> entries)
    : modulus_(std::move(modulus)), rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw PreconditionError("matrix expects " + std::to_string(rows_ * cols_) + " entries, got " +
                            std::to_string(entries_.size()));
  }
  for (Residue e : entries_) {
    if (e < 0 || e >= modulus_.value()) {
      throw PreconditionError("matrix entry " + std::to_string(e) + " outside [0, " +
                              std::to_string(modulus_.value()) + ")");
    }
  }
}

ZmMatrix ZmMatrix::from_integers(Modulus modulus, std::size_t rows, std::size_t cols,
                                 std::span<const std::int64_t> values) {
  std::vector<Residue> e(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) e[i] = modulus.reduce(values[i]);
  return ZmMatrix(std::move(modulus), rows, cols, std::move(e));
}

ZmMatrix ZmMatrix::identity(Modulus modulus, std::size_t n) {
  ZmMatrix out(std::move(modulus), n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1;
  return out;
}

ZmMatrix ZmMatrix::diagonal(Modulus modulus, std::span<const Residue> diag) {
  ZmMatrix out(std::move(modulus), diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) out(i, i) = out.modulus_.reduce(diag[i]);
  return out;
}

ZmMatrix ZmMatrix::transpose() const {
  ZmMatrix out(modulus_, cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
  return out;
}

ZmMatrix ZmMatrix::submatrix(std::span<const std::size_t> row_idx, std::span<const std::size_t> col_idx) const {
  ZmMatrix out(modulus_, row_idx.size(), col_idx.size());
  for (std::size_t r = 0; r < row_idx.size(); ++r)
    for (std::size_t c = 0; c < col_idx.size(); ++c) out(r, c) = (*this)(row_idx[r], col_idx[c]);
  return out;
}

ZmMatrix ZmMatrix::select_rows(std::span<const std::size_t> row_idx) const {
  ZmMatrix out(modulus_, row_idx.size(), cols_);
  for (std::size_t r = 0; r < row_idx.size(); ++r)
    std::copy_n(entries_.begin() + static_cast<std::ptrdiff_t>(row_idx[r] * cols_), cols_,
                out.entries_.begin() + static_cast<std::ptrdiff_t>(r * cols_));
  return out;
}

bool ZmMatrix::is_symmetric() const {
  if (rows_ != cols_) return false;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = r + 1; c < cols_; ++c)
      if ((*this)(r, c) != (*this)(c, r)) return false;
  return true;
}

bool ZmMatrix::is_zero() const {
  return std::all_of(entries_.begin(), entries_.end(), [](Residue e) { return e == 0; });
}

ZmMatrix ZmMatrix::plus_diagonal(std::span<const Residue> d) const {
  if (!is_square() || d.size() != rows_) throw PreconditionError("diagonal length must match a square matrix");
  ZmMatrix out = *this;
  for (std::size_t i = 0; i < rows_; ++i) out(i, i) = modulus_.add(out(i, i), modulus_.reduce(d[i]));
  return out;
}

bool ZmMatrix::is_invertible() const {
  if (!is_square()) return false;
  const std::size_t n = rows_;
  for (const auto& pp : modulus_.factorization()) {
    const std::int64_t p = pp.prime;
    std::vector<std::int64_t> w(entries_.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = entries_[i] % p;
    for (std::size_t col = 0; col < n; ++col) {
      std::size_t piv = col;
      while (piv < n && w[piv * n + col] == 0) ++piv;
      if (piv == n) return false;
      if (piv != col)
        for (std::size_t c = 0; c < n; ++c) std::swap(w[piv * n + c], w[col * n + c]);
      std::int64_t s = 0, t = 0;
      ext_gcd(w[col * n + col], p, s, t);
      const std::int64_t inv = ((s % p) + p) % p;
      for (std::size_t r = col + 1; r < n; ++r) {
        const std::int64_t f = w[r * n + col] * inv % p;
        if (f == 0) continue;
        for (std::size_t c = col; c < n; ++c) w[r * n + c] = ((w[r * n + c] - f * w[col * n + c]) % p + p) % p;
      }
    }
  }
  return true;
}

ZmMatrix operator*(const ZmMatrix& a, const ZmMatrix& b) {
  if (a.cols_ != b.rows_ || !(a.modulus_ == b.modulus_)) throw PreconditionError("incompatible matrix product");
  const std::int64_t m = a.modulus_.value();
  ZmMatrix out(a.modulus_, a.rows_, b.cols_);
  for (std::size_t i = 0; i < a.rows_; ++i)
    for (std::size_t k = 0; k < a.cols_; ++k) {
      const Residue aik = a(i, k);
      if (aik == 0) continue;
      for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) = (out(i, j) + aik * b(k, j)) % m;
    }
  return out;
}

ZmMatrix operator+(const ZmMatrix& a, const ZmMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_ || !(a.modulus_ == b.modulus_))
    throw PreconditionError("incompatible matrix sum");
  ZmMatrix out = a;
  for (std::size_t i = 0; i < out.entries_.size(); ++i) out.entries_[i] = a.modulus_.add(a.entries_[i], b.entries_[i]);
  return out;
}

bool operator==(const ZmMatrix& a, const ZmMatrix& b) {
  return a.modulus_ == b.modulus_ && a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
}

std::vector<Residue> ZmMatrix::left_multiply(std::span<const Residue> v) const {
  if (v.size() != rows_) throw PreconditionError("vector length must equal the row count");
  std::vector<Residue> out(cols_, 0);
  const std::int64_t m = modulus_.value();
  for (std::size_t r = 0; r < rows_; ++r) {
    const Residue vr = modulus_.reduce(v[r]);
    if (vr == 0) continue;
    for (std::size_t c = 0; c < cols_; ++c) out[c] = (out[c] + vr * (*this)(r, c)) % m;
  }
  return out;
}

std::vector<Residue> ZmMatrix::right_multiply(std::span<const Residue> w) const {
  if (w.size() != cols_) throw PreconditionError("vector length must equal the column count");
  std::vector<Residue> out(rows_, 0);
  const std::int64_t m = modulus_.value();
  for (std::size_t r = 0; r < rows_; ++r) {
    Residue acc = 0;
    for (std::size_t c = 0; c < cols_; ++c) acc = (acc + (*this)(r, c) * modulus_.reduce(w[c])) % m;
    out[r] = acc;
  }
  return out;
}

unsigned __int128 GroupShape::order() const {
  using u128 = unsigned __int128;
  constexpr u128 kMax = ~u128{0};
  u128 acc = 1;
  for (std::int64_t f : factors) {
    const u128 uf = static_cast<u128>(f);
    if (acc > kMax / uf) return kMax;
    acc *= uf;
  }
  return acc;
}

namespace {

// Row/column operations on the working matrix, mirrored into P (rows) and
// Q (columns) when those are tracked.
class SmithWorker {
 public:
  SmithWorker(const Modulus& mod, std::size_t rows, std::size_t cols, std::vector<Residue>& d,
              std::vector<Residue>* p, std::vector<Residue>* q)
      : mod_(mod), m_(mod.value()), rows_(rows), cols_(cols), d_(d), p_(p), q_(q) {}

  void run() {
    const std::size_t steps = std::min(rows_, cols_);
    for (std::size_t k = 0; k < steps; ++k) {
      if (!place_pivot(k)) break;
      reduce_pivot(k);
    }
  }

 private:
  Residue& at(std::size_t r, std::size_t c) { return d_[r * cols_ + c]; }

  bool place_pivot(std::size_t k) {
    std::int64_t best = m_;
    std::size_t bi = k, bj = k;
    for (std::size_t i = k; i < rows_; ++i)
      for (std::size_t j = k; j < cols_; ++j) {
        const Residue v = at(i, j);
        if (v == 0) continue;
        const std::int64_t g = std::gcd(v, m_);
        if (g < best) {
          best = g;
          bi = i;
          bj = j;
          if (g == 1) goto found;
        }
      }
    if (best == m_) return false;
  found:
    swap_rows(k, bi);
    swap_cols(k, bj);
    return true;
  }

  void reduce_pivot(std::size_t k) {
    for (;;) {
      normalize(k);
      const Residue g = at(k, k);
      bool changed = false;
      for (std::size_t i = k + 1; i < rows_ && !changed; ++i) {
        const Residue b = at(i, k);
        if (b == 0) continue;
        if (b % g == 0) {
          add_row(i, k, m_ - b / g);
        } else {
          combine_rows(k, i);
          changed = true;
        }
      }
      if (changed) continue;
      for (std::size_t j = k + 1; j < cols_ && !changed; ++j) {
        const Residue b = at(k, j);
        if (b == 0) continue;
        if (b % g == 0) {
          add_col(j, k, m_ - b / g);
        } else {
          combine_cols(k, j);
          changed = true;
        }
      }
      if (changed) continue;
      // The pivot must divide the whole trailing block.
      for (std::size_t i = k + 1; i < rows_ && !changed; ++i)
        for (std::size_t j = k + 1; j < cols_; ++j)
          if (at(i, j) % g != 0) {
            add_row(k, i, 1);
            changed = true;
            break;
          }
      if (!changed) return;
    }
  }

  // Scale row k by a unit so that the pivot becomes gcd(pivot, m).
  void normalize(std::size_t k) {
    const Residue a = at(k, k);
    const std::int64_t g = std::gcd(a, m_);
    if (a == g) return;
    const std::int64_t a1 = a / g, m1 = m_ / g;
    std::int64_t u0 = 0;
    if (m1 > 1) {
      std::int64_t s = 0, t = 0;
      ext_gcd(a1 % m1, m1, s, t);
      u0 = ((s % m1) + m1) % m1;
    }
    std::int64_t u = u0;
    for (std::int64_t t = 0; t < g; ++t) {
      u = (u0 + t * m1) % m_;
      if (std::gcd(u, m_) == 1) break;
    }
    scale_row(k, u);
  }

  void combine_rows(std::size_t k, std::size_t i) {
    const std::int64_t a = at(k, k), b = at(i, k);
    std::int64_t s = 0, t = 0;
    const std::int64_t h = ext_gcd(a, b, s, t);
    mix(d_, cols_, k, i, mod_.reduce(s), mod_.reduce(t), mod_.reduce(-(b / h)), mod_.reduce(a / h), true);
    if (p_) mix(*p_, rows_, k, i, mod_.reduce(s), mod_.reduce(t), mod_.reduce(-(b / h)), mod_.reduce(a / h), true);
  }

  void combine_cols(std::size_t k, std::size_t j) {
    const std::int64_t a = at(k, k), b = at(k, j);
    std::int64_t s = 0, t = 0;
    const std::int64_t h = ext_gcd(a, b, s, t);
    mix_cols(d_, rows_, cols_, k, j, mod_.reduce(s), mod_.reduce(t), mod_.reduce(-(b / h)), mod_.reduce(a / h));
    if (q_) mix_cols(*q_, cols_, cols_, k, j, mod_.reduce(s), mod_.reduce(t), mod_.reduce(-(b / h)), mod_.reduce(a / h));
  }

  // rows x <- s x + t y, y <- u x + v y
  void mix(std::vector<Residue>& mat, std::size_t width, std::size_t x, std::size_t y, Residue s, Residue t,
           Residue u, Residue v, bool) {
    for (std::size_t c = 0; c < width; ++c) {
      const Residue ex = mat[x * width + c], ey = mat[y * width + c];
      mat[x * width + c] = (s * ex + t * ey) % m_;
      mat[y * width + c] = (u * ex + v * ey) % m_;
    }
  }

  void mix_cols(std::vector<Residue>& mat, std::size_t height, std::size_t width, std::size_t x, std::size_t y,
                Residue s, Residue t, Residue u, Residue v) {
    for (std::size_t r = 0; r < height; ++r) {
      const Residue ex = mat[r * width + x], ey = mat[r * width + y];
      mat[r * width + x] = (s * ex + t * ey) % m_;
      mat[r * width + y] = (u * ex + v * ey) % m_;
    }
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t c = 0; c < cols_; ++c) std::swap(d_[a * cols_ + c], d_[b * cols_ + c]);
    if (p_)
      for (std::size_t c = 0; c < rows_; ++c) std::swap((*p_)[a * rows_ + c], (*p_)[b * rows_ + c]);
  }

  void swap_cols(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t r = 0; r < rows_; ++r) std::swap(d_[r * cols_ + a], d_[r * cols_ + b]);
    if (q_)
      for (std::size_t r = 0; r < cols_; ++r) std::swap((*q_)[r * cols_ + a], (*q_)[r * cols_ + b]);
  }

  void scale_row(std::size_t r, Residue u) {
    for (std::size_t c = 0; c < cols_; ++c) d_[r * cols_ + c] = d_[r * cols_ + c] * u % m_;
    if (p_)
      for (std::size_t c = 0; c < rows_; ++c) (*p_)[r * rows_ + c] = (*p_)[r * rows_ + c] * u % m_;
  }

  // row dst += c * row src
  void add_row(std::size_t dst, std::size_t src, Residue c) {
    for (std::size_t j = 0; j < cols_; ++j) d_[dst * cols_ + j] = (d_[dst * cols_ + j] + c * d_[src * cols_ + j]) % m_;
    if (p_)
      for (std::size_t j = 0; j < rows_; ++j)
        (*p_)[dst * rows_ + j] = ((*p_)[dst * rows_ + j] + c * (*p_)[src * rows_ + j]) % m_;
  }

  // col dst += c * col src
  void add_col(std::size_t dst, std::size_t src, Residue c) {
    for (std::size_t i = 0; i < rows_; ++i) d_[i * cols_ + dst] = (d_[i * cols_ + dst] + c * d_[i * cols_ + src]) % m_;
    if (q_)
      for (std::size_t i = 0; i < cols_; ++i)
        (*q_)[i * cols_ + dst] = ((*q_)[i * cols_ + dst] + c * (*q_)[i * cols_ + src]) % m_;
  }

  const Modulus& mod_;
  std::int64_t m_;
  std::size_t rows_, cols_;
  std::vector<Residue>& d_;
  std::vector<Residue>* p_;
  std::vector<Residue>* q_;
};

std::vector<std::int64_t> diagonal_only(const ZmMatrix& a) {
  std::vector<Residue> d = a.entries();
  SmithWorker(a.modulus(), a.rows(), a.cols(), d, nullptr, nullptr).run();
  const std::size_t steps = std::min(a.rows(), a.cols());
  std::vector<std::int64_t> gcds(steps);
  for (std::size_t i = 0; i < steps; ++i) gcds[i] = std::gcd(d[i * a.cols() + i], a.modulus().value());
  return gcds;
}

GroupShape shape_from_gcds(const std::vector<std::int64_t>& gcds, std::int64_t m) {
  GroupShape s;
  for (std::int64_t g : gcds)
    if (g != m) s.factors.push_back(m / g);
  std::sort(s.factors.begin(), s.factors.end());
  return s;
}

}  // namespace

std::vector<std::int64_t> SmithDecomposition::diagonal_gcds() const {
  const std::size_t steps = std::min(D.rows(), D.cols());
  std::vector<std::int64_t> out(steps);
  for (std::size_t i = 0; i < steps; ++i) out[i] = std::gcd(D(i, i), D.modulus().value());
  return out;
}

SmithDecomposition smith_normal_form(const ZmMatrix& a) {
  std::vector<Residue> d = a.entries();
  ZmMatrix p = ZmMatrix::identity(a.modulus(), a.rows());
  ZmMatrix q = ZmMatrix::identity(a.modulus(), a.cols());
  std::vector<Residue> pe = p.entries(), qe = q.entries();
  SmithWorker(a.modulus(), a.rows(), a.cols(), d, &pe, &qe).run();
  return SmithDecomposition{ZmMatrix(a.modulus(), a.rows(), a.rows(), std::move(pe)),
                            ZmMatrix(a.modulus(), a.cols(), a.cols(), std::move(qe)),
                            ZmMatrix(a.modulus(), a.rows(), a.cols(), std::move(d))};
}

GroupShape group_shape(const ZmMatrix& a, Side side) {
  const auto gcds = side == Side::Column ? diagonal_only(a) : diagonal_only(a.transpose());
  return shape_from_gcds(gcds, a.modulus().value());
}

namespace detail {
std::size_t rank_destructive(const Modulus& modulus, std::size_t rows, std::size_t cols,
                             std::vector<Residue>& entries) {
  SmithWorker(modulus, rows, cols, entries, nullptr, nullptr).run();
  std::size_t r = 0;
  for (std::size_t i = 0; i < std::min(rows, cols); ++i) r += entries[i * cols + i] != 0 ? 1 : 0;
  return r;
}
}  // namespace detail

std::size_t rank(const ZmMatrix& a) {
  const auto gcds = diagonal_only(a);
  const std::int64_t m = a.modulus().value();
  return static_cast<std::size_t>(std::count_if(gcds.begin(), gcds.end(), [m](std::int64_t g) { return g != m; }));
}

Nullspace left_nullspace_with_orders(const ZmMatrix& a) {
  const auto snf = smith_normal_form(a);
  const std::int64_t m = a.modulus().value();
  const std::size_t steps = std::min(a.rows(), a.cols());
  std::vector<Residue> gens;
  std::vector<std::int64_t> orders;
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::int64_t scale = 1, order = m;
    if (i < steps) {
      const std::int64_t g = std::gcd(snf.D(i, i), m);
      if (g == 1) continue;
      scale = m / g;
      order = g;
      if (g == m) scale = 1;
    }
    for (std::size_t c = 0; c < a.rows(); ++c) gens.push_back(snf.P(i, c) * scale % m);
    orders.push_back(order);
    ++count;
  }
  return Nullspace{ZmMatrix(a.modulus(), count, a.rows(), std::move(gens)), std::move(orders)};
}

ZmMatrix left_nullspace(const ZmMatrix& a) { return left_nullspace_with_orders(a).generators; }

std::optional<std::vector<Residue>> solve_left(const ZmMatrix& mat, std::span<const Residue> b) {
  if (b.size() != mat.cols()) throw PreconditionError("right-hand side length must equal the column count");
  const auto snf = smith_normal_form(mat);
  const Modulus& mod = mat.modulus();
  const std::size_t rows = mat.rows(), cols = mat.cols(), steps = std::min(rows, cols);
  // c^T = b^T Q
  std::vector<Residue> c(cols, 0);
  for (std::size_t j = 0; j < cols; ++j) {
    Residue acc = 0;
    for (std::size_t i = 0; i < cols; ++i) acc = (acc + mod.reduce(b[i]) * snf.Q(i, j)) % mod.value();
    c[j] = acc;
  }
  std::vector<Residue> w(rows, 0);
  for (std::size_t j = 0; j < cols; ++j) {
    if (j >= steps) {
      if (c[j] != 0) return std::nullopt;
      continue;
    }
    const Residue dj = snf.D(j, j);
    if (dj == 0) {
      if (c[j] != 0) return std::nullopt;
      continue;
    }
    if (c[j] % dj != 0) return std::nullopt;
    w[j] = c[j] / dj;
  }
  std::vector<Residue> a(rows, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    Residue acc = 0;
    for (std::size_t j = 0; j < rows; ++j) acc = (acc + w[j] * snf.P(j, i)) % mod.value();
    a[i] = acc;
  }
  return a;
}

std::optional<std::vector<Residue>> solve_left_lex_least(const ZmMatrix& mat, std::span<const Residue> b,
                                                         std::uint64_t enumeration_limit) {
  auto particular = solve_left(mat, b);
  if (!particular) return particular;
  const auto null = left_nullspace_with_orders(mat);
  std::uint64_t total = 1;
  for (std::int64_t o : null.orders) {
    if (total > enumeration_limit / static_cast<std::uint64_t>(o)) return particular;
    total *= static_cast<std::uint64_t>(o);
  }
  const Modulus& mod = mat.modulus();
  const std::size_t k = null.orders.size(), len = mat.rows();
  std::vector<Residue> cur = *particular, best = cur;
  std::vector<std::int64_t> digit(k, 0);
  for (std::uint64_t step = 1; step < total; ++step) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t c = 0; c < len; ++c) cur[c] = mod.add(cur[c], null.generators(i, c));
      if (++digit[i] < null.orders[i]) break;
      digit[i] = 0;
    }
    if (cur < best) best = cur;
  }
  return best;
}

std::vector<std::size_t> spanning_rows(const ZmMatrix& a, std::span<const std::size_t> candidates) {
  const std::vector<std::size_t> all(candidates.begin(), candidates.end());
  const auto target = group_shape(a.select_rows(all)).order();
  std::vector<std::size_t> chosen;
  unsigned __int128 current = 1;
  while (current < target) {
    std::size_t best_idx = candidates.size();
    unsigned __int128 best_order = current;
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
      const std::size_t r = candidates[ci];
      if (std::find(chosen.begin(), chosen.end(), r) != chosen.end()) continue;
      std::vector<std::size_t> trial = chosen;
      trial.push_back(r);
      const auto ord = group_shape(a.select_rows(trial)).order();
      if (ord > best_order) {
        best_order = ord;
        best_idx = ci;
      }
    }
    if (best_idx == candidates.size()) break;
    chosen.push_back(candidates[best_idx]);
    current = best_order;
  }
  return chosen;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> full_rank_submatrix(const ZmMatrix& a) {
  if (!a.modulus().is_prime_power()) {
    throw PreconditionError("prime-power required: full-rank submatrix extraction needs m = p^k, got m = " +
                            std::to_string(a.modulus().value()));
  }
  std::vector<std::size_t> all_rows(a.rows());
  std::iota(all_rows.begin(), all_rows.end(), 0);
  auto rows = spanning_rows(a, all_rows);
  std::sort(rows.begin(), rows.end());
  const ZmMatrix restricted_t = a.select_rows(rows).transpose();
  std::vector<std::size_t> all_cols(a.cols());
  std::iota(all_cols.begin(), all_cols.end(), 0);
  auto cols = spanning_rows(restricted_t, all_cols);
  std::sort(cols.begin(), cols.end());
  return {std::move(rows), std::move(cols)};
}

}  // namespace modquad
