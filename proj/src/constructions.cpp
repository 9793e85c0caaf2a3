#include "modquad/constructions.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <map>
#include <ostream>
#include <string>

#include "modquad/counting.hpp"
#include "modquad/errors.hpp"
#include "parallel.hpp"

namespace modquad {

namespace {

struct Monomial {
  std::uint64_t alpha;
  std::uint64_t beta;
  std::int64_t coef;
};

// 2 x_i y_i - x_i - y_i + 1 as a list of monomials.
std::vector<Monomial> substitution(std::size_t i) {
  const std::uint64_t b = std::uint64_t{1} << i;
  return {{0, 0, 1}, {b, 0, -1}, {0, b, -1}, {b, b, 2}};
}

}  // namespace

std::vector<std::pair<std::pair<std::uint64_t, std::uint64_t>, Residue>> substituted_expansion(const QuadPoly& f) {
  if (f.n() > 63) throw PreconditionError("substitution supports at most 63 variables");
  const Modulus& mod = f.modulus();
  std::map<std::pair<std::uint64_t, std::uint64_t>, Residue> acc;
  auto add = [&](std::uint64_t a, std::uint64_t b, std::int64_t c) {
    Residue& slot = acc[{a, b}];
    slot = mod.add(slot, mod.reduce(c));
  };
  if (f.constant() != 0) add(0, 0, f.constant());
  for (std::size_t i = 0; i < f.n(); ++i) {
    if (f.linear(i) == 0) continue;
    for (const auto& t : substitution(i)) add(t.alpha, t.beta, t.coef * f.linear(i));
  }
  for (const auto& q : f.quad_terms()) {
    for (const auto& s : substitution(q.i))
      for (const auto& t : substitution(q.j)) add(s.alpha | t.alpha, s.beta | t.beta, s.coef * t.coef * q.coef);
  }
  std::vector<std::pair<std::pair<std::uint64_t, std::uint64_t>, Residue>> out;
  for (const auto& [key, c] : acc)
    if (c != 0) out.emplace_back(key, c);
  return out;
}

MvfFamily mvf_from_or_poly(const QuadPoly& f) {
  if (f.n() > 20) throw BudgetExceeded("MVF construction materializes 2^n vectors and supports n <= 20");
  if (!check_weak_or(f)) throw PreconditionError("polynomial does not weakly represent OR");
  const auto terms = substituted_expansion(f);
  MvfFamily fam;
  fam.modulus = f.modulus().value();
  fam.dim = terms.size();
  for (const auto& t : terms) fam.basis.push_back(t.first);
  const std::uint64_t points = std::uint64_t{1} << f.n();
  const std::uint64_t all = points - 1;
  fam.S.reserve(points);
  fam.T.reserve(points);
  for (std::uint64_t x = 0; x < points; ++x) {
    const std::uint64_t y = all ^ x;
    std::vector<Residue> s(fam.dim), t(fam.dim);
    for (std::size_t k = 0; k < fam.dim; ++k) {
      const auto [alpha, beta] = terms[k].first;
      s[k] = (x & alpha) == alpha ? terms[k].second : 0;
      t[k] = (y & beta) == beta ? 1 : 0;
    }
    fam.S.push_back(std::move(s));
    fam.T.push_back(std::move(t));
    fam.s_points.push_back(x);
    fam.t_points.push_back(y);
  }
  return fam;
}

MvfVerification verify_mvf(const MvfFamily& fam, unsigned workers) {
  const std::size_t count = fam.S.size();
  if (fam.T.size() != count) throw PreconditionError("S and T must have the same length");
  for (std::size_t i = 0; i < count; ++i) {
    if (fam.S[i].size() != fam.dim || fam.T[i].size() != fam.dim) {
      throw PreconditionError("vector " + std::to_string(i) + " does not have dimension " + std::to_string(fam.dim));
    }
  }
  const std::int64_t m = fam.modulus;
  const std::size_t block = 16;
  const std::uint64_t tasks = (count + block - 1) / block;
  std::vector<std::pair<std::size_t, std::size_t>> first(tasks, {count, count});
  std::atomic<std::uint64_t> earliest{std::numeric_limits<std::uint64_t>::max()};
  detail::run_tasks(tasks, detail::resolve_workers(workers), [&](std::uint64_t task, unsigned) {
    if (task > earliest.load()) return;
    for (std::size_t i = task * block; i < std::min(count, (task + 1) * block); ++i) {
      const auto& s = fam.S[i];
      for (std::size_t j = 0; j < count; ++j) {
        const auto& t = fam.T[j];
        std::int64_t acc = 0;
        for (std::size_t k = 0; k < fam.dim; ++k) acc += s[k] * t[k];
        const bool zero = acc % m == 0;
        if (zero != (i == j)) {
          first[task] = {i, j};
          std::uint64_t cur = earliest.load();
          while (task < cur && !earliest.compare_exchange_weak(cur, task)) {
          }
          return;
        }
      }
    }
  });
  MvfVerification res;
  res.products = static_cast<std::uint64_t>(count) * count;
  for (const auto& v : first) {
    if (v.first != count) {
      res.ok = false;
      res.violation = v;
      break;
    }
  }
  return res;
}

CubeGraph::CubeGraph(std::size_t n, const std::vector<QuadPoly>& predicates) : n_(n) {
  if (n > 14) throw BudgetExceeded("cube graphs are materialized for n <= 14");
  for (const auto& p : predicates)
    if (p.n() != n) throw PreconditionError("predicate polynomial has " + std::to_string(p.n()) + " variables, expected " + std::to_string(n));
  const std::size_t v = vertex_count();
  words_ = (v + 63) / 64;
  adj_.assign(v * words_, 0);
  std::vector<bool> zero(v, true);
  for (std::size_t z = 0; z < v; ++z)
    for (const auto& p : predicates)
      if (p.evaluate_bits(z) != 0) {
        zero[z] = false;
        break;
      }
  for (std::size_t x = 0; x < v; ++x)
    for (std::size_t y = 0; y < v; ++y)
      if (x != y && zero[x ^ y]) adj_[x * words_ + y / 64] |= std::uint64_t{1} << (y % 64);
}

std::size_t CubeGraph::degree(std::size_t v) const {
  std::size_t d = 0;
  for (std::size_t w = 0; w < words_; ++w) d += static_cast<std::size_t>(__builtin_popcountll(adj_[v * words_ + w]));
  return d;
}

std::uint64_t CubeGraph::edge_count() const {
  std::uint64_t e = 0;
  for (std::size_t v = 0; v < vertex_count(); ++v) e += degree(v);
  return e / 2;
}

CubeGraph CubeGraph::complement() const {
  CubeGraph c;
  c.n_ = n_;
  c.words_ = words_;
  c.adj_.resize(adj_.size());
  const std::size_t v = vertex_count();
  for (std::size_t x = 0; x < v; ++x)
    for (std::size_t w = 0; w < words_; ++w) {
      std::uint64_t bits = ~adj_[x * words_ + w];
      if (w == words_ - 1 && v % 64 != 0) bits &= (std::uint64_t{1} << (v % 64)) - 1;
      if (x / 64 == w) bits &= ~(std::uint64_t{1} << (x % 64));
      c.adj_[x * words_ + w] = bits;
    }
  return c;
}

void CubeGraph::write_dimacs(std::ostream& out) const {
  out << "p edge " << vertex_count() << ' ' << edge_count() << '\n';
  for (std::size_t x = 0; x < vertex_count(); ++x)
    for (std::size_t y = x + 1; y < vertex_count(); ++y)
      if (adjacent(x, y)) out << "e " << x + 1 << ' ' << y + 1 << '\n';
}

namespace {

using Bits = std::vector<std::uint64_t>;

bool any(const Bits& b) {
  return std::any_of(b.begin(), b.end(), [](std::uint64_t w) { return w != 0; });
}

std::size_t popcount(const Bits& b) {
  std::size_t c = 0;
  for (auto w : b) c += static_cast<std::size_t>(__builtin_popcountll(w));
  return c;
}

class CliqueSearch {
 public:
  CliqueSearch(const CubeGraph& g, std::uint64_t budget) : g_(g), words_(g.words()), budget_(budget) {}

  CliqueResult run(const Bits& candidates) {
    CliqueResult res;
    greedy_seed(candidates);
    std::vector<std::size_t> current;
    bool complete = true;
    try {
      expand(current, candidates);
    } catch (const BudgetExceeded&) {
      complete = false;
    }
    res.size = best_.size();
    res.clique = best_;
    res.exact = complete;
    res.upper = complete ? best_.size() : std::max(best_.size(), root_bound_);
    return res;
  }

 private:
  void greedy_seed(const Bits& candidates) {
    Bits p = candidates;
    std::vector<std::size_t> clique;
    while (any(p)) {
      std::size_t pick = 0, best_deg = 0;
      bool have = false;
      for (std::size_t w = 0; w < words_; ++w)
        for (std::uint64_t bits = p[w]; bits != 0; bits &= bits - 1) {
          const std::size_t v = w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits));
          std::size_t deg = 0;
          for (std::size_t k = 0; k < words_; ++k) deg += static_cast<std::size_t>(__builtin_popcountll(p[k] & g_.row(v)[k]));
          if (!have || deg > best_deg) {
            pick = v;
            best_deg = deg;
            have = true;
          }
        }
      clique.push_back(pick);
      for (std::size_t k = 0; k < words_; ++k) p[k] &= g_.row(pick)[k];
    }
    best_ = clique;
  }

  // Greedy colouring of p; vertices come out in colour order.
  void colour(const Bits& p, std::vector<std::size_t>& order, std::vector<std::size_t>& colours) {
    Bits uncoloured = p;
    std::size_t c = 0;
    while (any(uncoloured)) {
      ++c;
      Bits avail = uncoloured;
      while (any(avail)) {
        std::size_t w = 0;
        while (avail[w] == 0) ++w;
        const std::size_t v = w * 64 + static_cast<std::size_t>(__builtin_ctzll(avail[w]));
        avail[w] &= avail[w] - 1;
        for (std::size_t k = 0; k < words_; ++k) avail[k] &= ~g_.row(v)[k];
        uncoloured[v / 64] &= ~(std::uint64_t{1} << (v % 64));
        order.push_back(v);
        colours.push_back(c);
      }
    }
  }

  void expand(std::vector<std::size_t>& current, Bits p) {
    if (++nodes_ > budget_) throw BudgetExceeded("clique search node budget exhausted");
    std::vector<std::size_t> order, colours;
    colour(p, order, colours);
    if (current.empty()) root_bound_ = colours.empty() ? 0 : colours.back();
    for (std::size_t i = order.size(); i-- > 0;) {
      if (current.size() + colours[i] <= best_.size()) return;
      const std::size_t v = order[i];
      current.push_back(v);
      Bits next(words_);
      for (std::size_t k = 0; k < words_; ++k) next[k] = p[k] & g_.row(v)[k];
      if (!any(next)) {
        if (current.size() > best_.size()) best_ = current;
      } else {
        expand(current, std::move(next));
      }
      current.pop_back();
      p[v / 64] &= ~(std::uint64_t{1} << (v % 64));
    }
  }

  const CubeGraph& g_;
  std::size_t words_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::size_t root_bound_ = 0;
  std::vector<std::size_t> best_;
};

Bits all_vertices(const CubeGraph& g) {
  Bits b(g.words(), 0);
  for (std::size_t v = 0; v < g.vertex_count(); ++v) b[v / 64] |= std::uint64_t{1} << (v % 64);
  return b;
}

// Smallest-last ordering: the largest minimum degree seen bounds the
// clique number by degeneracy + 1.
std::size_t degeneracy(const CubeGraph& g) {
  const std::size_t v = g.vertex_count();
  std::vector<std::size_t> deg(v);
  std::vector<bool> removed(v, false);
  for (std::size_t x = 0; x < v; ++x) deg[x] = g.degree(x);
  std::size_t k = 0;
  for (std::size_t step = 0; step < v; ++step) {
    std::size_t pick = v;
    for (std::size_t x = 0; x < v; ++x)
      if (!removed[x] && (pick == v || deg[x] < deg[pick])) pick = x;
    k = std::max(k, deg[pick]);
    removed[pick] = true;
    for (std::size_t y = 0; y < v; ++y)
      if (!removed[y] && g.adjacent(pick, y)) --deg[y];
  }
  return k;
}

CliqueResult greedy_bounds(const CubeGraph& g) {
  CliqueSearch s(g, 0);
  CliqueResult res = s.run(all_vertices(g));
  res.exact = false;
  res.upper = std::max(res.size, degeneracy(g) + 1);
  return res;
}

}  // namespace

CliqueResult max_clique(const CubeGraph& g, std::uint64_t node_budget) {
  return CliqueSearch(g, node_budget).run(all_vertices(g));
}

CliqueResult cayley_clique(const CubeGraph& g, std::uint64_t node_budget) {
  Bits nbrs(g.row(0), g.row(0) + g.words());
  CliqueResult inner = CliqueSearch(g, node_budget).run(nbrs);
  CliqueResult res;
  res.size = inner.size + 1;
  res.clique.push_back(0);
  res.clique.insert(res.clique.end(), inner.clique.begin(), inner.clique.end());
  std::sort(res.clique.begin(), res.clique.end());
  res.upper = inner.upper + 1;
  res.exact = inner.exact;
  if (popcount(nbrs) == 0) res.upper = 1;
  return res;
}

RamseyStats ramsey_graph_stats(const CubeGraph& g, std::size_t exact_limit, std::uint64_t node_budget) {
  RamseyStats st;
  st.vertices = g.vertex_count();
  st.edges = g.edge_count();
  const CubeGraph comp = g.complement();
  if (g.vertex_count() <= exact_limit) {
    st.clique = cayley_clique(g, node_budget);
    st.independent = cayley_clique(comp, node_budget);
  } else {
    st.clique = greedy_bounds(g);
    st.independent = greedy_bounds(comp);
  }
  return st;
}

}  // namespace modquad
