#pragma once

// Finite directed graphs and the exact structural queries used by the
// threshold reductions: clique number, graph homomorphisms, chromatic number
// and the rank (longest outgoing path) function.
//
// Exact algorithms only. The bitmask-based searches support up to 64 vertices
// on the bitmask side, well beyond the desk-scale sizes they are meant for.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "randsub/errors.hpp"

namespace randsub {

using Vertex = std::size_t;
using Edge = std::pair<Vertex, Vertex>;

inline constexpr std::size_t kMaskVertexLimit = 64;

class DirectedGraph {
 public:
  DirectedGraph() = default;

  // Edges may be given in any order; duplicates and out-of-range endpoints
  // throw DomainError. Loops (a, a) are allowed.
  DirectedGraph(std::size_t vertex_count, std::vector<Edge> edges)
      : vertex_count_(vertex_count),
        edges_(std::move(edges)),
        matrix_(vertex_count * vertex_count, 0),
        out_(vertex_count),
        in_(vertex_count) {
    for (const auto& [a, b] : edges_) {
      if (a >= vertex_count_ || b >= vertex_count_) {
        throw DomainError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                          ") has an endpoint outside [0," + std::to_string(vertex_count_) + ")");
      }
      char& cell = matrix_[a * vertex_count_ + b];
      if (cell) {
        throw DomainError("duplicate edge (" + std::to_string(a) + "," + std::to_string(b) + ")");
      }
      cell = 1;
    }
    std::sort(edges_.begin(), edges_.end());
    for (const auto& [a, b] : edges_) {
      out_[a].push_back(b);
      in_[b].push_back(a);
    }
  }

  std::size_t vertex_count() const noexcept { return vertex_count_; }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  // Sorted lexicographically.
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  bool has_edge(Vertex a, Vertex b) const noexcept {
    return a < vertex_count_ && b < vertex_count_ && matrix_[a * vertex_count_ + b] != 0;
  }

  // Connected in at least one direction.
  bool adjacent(Vertex a, Vertex b) const noexcept { return has_edge(a, b) || has_edge(b, a); }

  bool has_loop(Vertex a) const noexcept { return has_edge(a, a); }

  const std::vector<Vertex>& out_neighbors(Vertex a) const { return out_.at(a); }
  const std::vector<Vertex>& in_neighbors(Vertex a) const { return in_.at(a); }

  friend bool operator==(const DirectedGraph& x, const DirectedGraph& y) {
    return x.vertex_count_ == y.vertex_count_ && x.edges_ == y.edges_;
  }

 private:
  std::size_t vertex_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<char> matrix_;
  std::vector<std::vector<Vertex>> out_;
  std::vector<std::vector<Vertex>> in_;
};

// ---------------------------------------------------------------------------
// Standard graphs

// K_p: all ordered pairs of distinct vertices.
inline DirectedGraph complete_graph(std::size_t p) {
  std::vector<Edge> edges;
  for (Vertex a = 0; a < p; ++a)
    for (Vertex b = 0; b < p; ++b)
      if (a != b) edges.emplace_back(a, b);
  return DirectedGraph(p, std::move(edges));
}

// T_p: edges (i, j) for i < j.
inline DirectedGraph transitive_tournament(std::size_t p) {
  std::vector<Edge> edges;
  for (Vertex a = 0; a < p; ++a)
    for (Vertex b = a + 1; b < p; ++b) edges.emplace_back(a, b);
  return DirectedGraph(p, std::move(edges));
}

inline DirectedGraph edgeless_graph(std::size_t n) { return DirectedGraph(n, {}); }

// One vertex carrying a loop: every graph maps to it.
inline DirectedGraph loop_graph() { return DirectedGraph(1, {{0, 0}}); }

inline DirectedGraph directed_cycle(std::size_t n) {
  std::vector<Edge> edges;
  for (Vertex a = 0; a < n; ++a) edges.emplace_back(a, (a + 1) % n);
  return DirectedGraph(n, std::move(edges));
}

inline DirectedGraph symmetric_cycle(std::size_t n) {
  std::vector<Edge> edges;
  for (Vertex a = 0; a < n; ++a) {
    edges.emplace_back(a, (a + 1) % n);
    edges.emplace_back((a + 1) % n, a);
  }
  return DirectedGraph(n, std::move(edges));
}

inline DirectedGraph symmetric_path(std::size_t n) {
  std::vector<Edge> edges;
  for (Vertex a = 0; a + 1 < n; ++a) {
    edges.emplace_back(a, a + 1);
    edges.emplace_back(a + 1, a);
  }
  return DirectedGraph(n, std::move(edges));
}

// ---------------------------------------------------------------------------
// Edge-set predicates

inline bool is_irreflexive(const DirectedGraph& g) {
  for (Vertex a = 0; a < g.vertex_count(); ++a)
    if (g.has_loop(a)) return false;
  return true;
}

inline bool is_symmetric(const DirectedGraph& g) {
  for (const auto& [a, b] : g.edges())
    if (!g.has_edge(b, a)) return false;
  return true;
}

// A loop (a, a) is its own reverse, so graphs with loops are not antisymmetric.
inline bool is_antisymmetric(const DirectedGraph& g) {
  for (const auto& [a, b] : g.edges())
    if (g.has_edge(b, a)) return false;
  return true;
}

inline DirectedGraph symmetric_closure(const DirectedGraph& g) {
  std::vector<Edge> edges = g.edges();
  for (const auto& [a, b] : g.edges())
    if (!g.has_edge(b, a)) edges.emplace_back(b, a);
  return DirectedGraph(g.vertex_count(), std::move(edges));
}

// ---------------------------------------------------------------------------
// Cliques

namespace detail {

using Mask = std::uint64_t;

inline void require_mask_size(const DirectedGraph& g, const char* what) {
  if (g.vertex_count() > kMaskVertexLimit) {
    throw DomainError(std::string(what) + ": graph exceeds " + std::to_string(kMaskVertexLimit) +
                      " vertices");
  }
}

// Undirected adjacency without loops: bit b of row a set iff a != b and
// (a, b) or (b, a) is an edge.
inline std::vector<Mask> undirected_rows(const DirectedGraph& g) {
  std::vector<Mask> rows(g.vertex_count(), 0);
  for (const auto& [a, b] : g.edges()) {
    if (a == b) continue;
    rows[a] |= Mask{1} << b;
    rows[b] |= Mask{1} << a;
  }
  return rows;
}

inline Mask full_mask(std::size_t n) { return n == 64 ? ~Mask{0} : (Mask{1} << n) - 1; }

inline std::vector<Vertex> mask_vertices(Mask m) {
  std::vector<Vertex> out;
  while (m) {
    out.push_back(static_cast<Vertex>(std::countr_zero(m)));
    m &= m - 1;
  }
  return out;
}

class MaxCliqueSearch {
 public:
  explicit MaxCliqueSearch(const std::vector<Mask>& rows) : rows_(rows) {}

  Mask run(Mask candidates) {
    best_ = 0;
    best_size_ = 0;
    expand(0, 0, candidates);
    return best_;
  }

 private:
  void expand(Mask current, int size, Mask candidates) {
    if (candidates == 0) {
      if (size > best_size_) {
        best_size_ = size;
        best_ = current;
      }
      return;
    }
    while (candidates) {
      if (size + std::popcount(candidates) <= best_size_) return;
      const int v = std::countr_zero(candidates);
      const Mask bit = Mask{1} << v;
      expand(current | bit, size + 1, candidates & rows_[v]);
      candidates &= ~bit;
    }
  }

  const std::vector<Mask>& rows_;
  Mask best_ = 0;
  int best_size_ = 0;
};

}  // namespace detail

// A largest vertex set whose distinct pairs are connected in some direction.
// Among maximum cliques the lexicographically first found is returned.
inline std::vector<Vertex> maximum_clique(const DirectedGraph& g) {
  if (g.vertex_count() == 0) throw DomainError("clique number of the empty graph");
  detail::require_mask_size(g, "maximum_clique");
  const auto rows = detail::undirected_rows(g);
  detail::MaxCliqueSearch search(rows);
  return detail::mask_vertices(search.run(detail::full_mask(g.vertex_count())));
}

inline std::size_t clique_number(const DirectedGraph& g) { return maximum_clique(g).size(); }

// All maximal cliques (Bron-Kerbosch with pivoting), each sorted, in
// discovery order. Stops after `limit` cliques.
inline std::vector<std::vector<Vertex>> maximal_cliques(const DirectedGraph& g,
                                                        std::size_t limit = 4096) {
  detail::require_mask_size(g, "maximal_cliques");
  using detail::Mask;
  const auto rows = detail::undirected_rows(g);
  std::vector<std::vector<Vertex>> out;
  auto recurse = [&](auto&& self, Mask r, Mask p, Mask x) -> void {
    if (out.size() >= limit) return;
    if (p == 0 && x == 0) {
      out.push_back(detail::mask_vertices(r));
      return;
    }
    const Mask px = p | x;
    int pivot = std::countr_zero(px);
    int best = -1;
    for (Mask m = px; m; m &= m - 1) {
      const int u = std::countr_zero(m);
      const int c = std::popcount(p & rows[u]);
      if (c > best) {
        best = c;
        pivot = u;
      }
    }
    for (Mask m = p & ~rows[pivot]; m; m &= m - 1) {
      const int v = std::countr_zero(m);
      const Mask bit = Mask{1} << v;
      self(self, r | bit, p & rows[v], x & rows[v]);
      p &= ~bit;
      x |= bit;
    }
  };
  if (g.vertex_count() > 0) recurse(recurse, 0, detail::full_mask(g.vertex_count()), 0);
  return out;
}

inline bool is_clique(const DirectedGraph& g, const std::vector<Vertex>& vs) {
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j)
      if (!g.adjacent(vs[i], vs[j])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Homomorphisms

struct HomWitness {
  std::vector<Vertex> assignment;  // assignment[v] is the image of source vertex v
};

inline bool is_homomorphism(const DirectedGraph& source, const DirectedGraph& target,
                            const std::vector<Vertex>& assignment) {
  if (assignment.size() != source.vertex_count()) return false;
  for (Vertex u : assignment)
    if (u >= target.vertex_count()) return false;
  for (const auto& [a, b] : source.edges())
    if (!target.has_edge(assignment[a], assignment[b])) return false;
  return true;
}

// Decides source -> target. Backtracking over source vertices in order of
// descending degree (ties: lowest index), values tried lowest first, with
// forward checking on the neighbours of each assigned vertex.
inline std::optional<HomWitness> hom_exists(const DirectedGraph& source,
                                            const DirectedGraph& target) {
  using detail::Mask;
  detail::require_mask_size(target, "hom_exists target");
  const std::size_t n = source.vertex_count();
  const std::size_t m = target.vertex_count();
  if (n == 0) return HomWitness{};
  if (m == 0) return std::nullopt;

  std::vector<Mask> out_mask(m, 0), in_mask(m, 0);
  Mask loops = 0;
  for (const auto& [a, b] : target.edges()) {
    out_mask[a] |= Mask{1} << b;
    in_mask[b] |= Mask{1} << a;
    if (a == b) loops |= Mask{1} << a;
  }

  std::vector<Vertex> order(n);
  for (Vertex v = 0; v < n; ++v) order[v] = v;
  auto degree = [&](Vertex v) { return source.out_neighbors(v).size() + source.in_neighbors(v).size(); };
  std::stable_sort(order.begin(), order.end(),
                   [&](Vertex x, Vertex y) { return degree(x) > degree(y); });

  std::vector<Mask> domains(n, detail::full_mask(m));
  for (Vertex v = 0; v < n; ++v)
    if (source.has_loop(v)) domains[v] &= loops;

  std::vector<Vertex> assignment(n, 0);
  std::vector<char> assigned(n, 0);

  auto search = [&](auto&& self, std::size_t depth, std::vector<Mask>& dom) -> bool {
    if (depth == n) return true;
    const Vertex v = order[depth];
    for (Mask candidates = dom[v]; candidates; candidates &= candidates - 1) {
      const Vertex a = static_cast<Vertex>(std::countr_zero(candidates));
      std::vector<Mask> next = dom;
      bool wiped = false;
      for (Vertex w : source.out_neighbors(v)) {
        if (assigned[w] || w == v) continue;
        next[w] &= out_mask[a];
        if (!next[w]) {
          wiped = true;
          break;
        }
      }
      if (!wiped) {
        for (Vertex w : source.in_neighbors(v)) {
          if (assigned[w] || w == v) continue;
          next[w] &= in_mask[a];
          if (!next[w]) {
            wiped = true;
            break;
          }
        }
      }
      if (wiped) continue;
      assignment[v] = a;
      assigned[v] = 1;
      if (self(self, depth + 1, next)) return true;
      assigned[v] = 0;
    }
    return false;
  };

  for (Vertex v = 0; v < n; ++v)
    if (!domains[v]) return std::nullopt;
  if (!search(search, 0, domains)) return std::nullopt;
  return HomWitness{std::move(assignment)};
}

// Smallest p with G -> K_p. Undefined for graphs with loops.
inline std::size_t chromatic_number(const DirectedGraph& g) {
  if (g.vertex_count() == 0) throw DomainError("chromatic number of the empty graph");
  if (!is_irreflexive(g)) throw DomainError("chromatic number undefined: graph has a loop");
  for (std::size_t p = 1;; ++p) {
    if (hom_exists(g, complete_graph(p))) return p;
  }
}

// ---------------------------------------------------------------------------
// Rank function

// Number of edges of the longest path starting at a vertex, or the cycle
// marker when the vertex reaches a cycle (an infinite walk starts there).
class Rank {
 public:
  constexpr explicit Rank(std::size_t value) noexcept : value_(value), cycle_(false) {}

  static constexpr Rank cycle() noexcept { return Rank(); }

  constexpr bool is_cycle() const noexcept { return cycle_; }
  constexpr bool is_finite() const noexcept { return !cycle_; }

  std::size_t value() const {
    if (cycle_) throw DomainError("rank is CYCLE");
    return value_;
  }

  friend constexpr bool operator==(Rank x, Rank y) noexcept {
    return x.cycle_ == y.cycle_ && (x.cycle_ || x.value_ == y.value_);
  }

 private:
  constexpr Rank() noexcept : value_(0), cycle_(true) {}

  std::size_t value_;
  bool cycle_;
};

using RankVector = std::vector<Rank>;

// Peels sinks in reverse topological order; rank(u) = 1 + max rank of its
// out-neighbours. Vertices never peeled reach a cycle.
inline RankVector rank_vector(const DirectedGraph& g) {
  const std::size_t n = g.vertex_count();
  std::vector<std::size_t> pending(n), rank(n, 0);
  std::vector<Vertex> queue;
  queue.reserve(n);
  for (Vertex v = 0; v < n; ++v) {
    pending[v] = g.out_neighbors(v).size();
    if (pending[v] == 0) queue.push_back(v);
  }
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vertex v = queue[head];
    for (Vertex u : g.in_neighbors(v)) {
      rank[u] = std::max(rank[u], rank[v] + 1);
      if (--pending[u] == 0) queue.push_back(u);
    }
  }
  RankVector out(n, Rank::cycle());
  for (Vertex v : queue) out[v] = Rank(rank[v]);
  return out;
}

// Longest path measured in edges; CYCLE if any vertex reaches a cycle.
inline Rank longest_path_length(const DirectedGraph& g) {
  std::size_t best = 0;
  for (const Rank& r : rank_vector(g)) {
    if (r.is_cycle()) return Rank::cycle();
    best = std::max(best, r.value());
  }
  return Rank(best);
}

}  // namespace randsub
