#pragma once

// Random subgraphs of the complete graph on a window [0, n) of the naturals
// (edges (i, j) with i < j), the extremal constructions built from words,
// and seeded Monte Carlo estimates of the probability of long paths.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "randsub/capacity.hpp"
#include "randsub/errors.hpp"
#include "randsub/graph.hpp"
#include "randsub/measures.hpp"
#include "randsub/rng.hpp"

namespace randsub {

// One realization X(x): a set of pairs (i, j), i < j < window.
class SubgraphSample {
 public:
  explicit SubgraphSample(std::size_t window) : window_(window), present_(window * window, 0) {}

  std::size_t window() const noexcept { return window_; }

  void set_edge(std::size_t i, std::size_t j, bool on = true) {
    if (!(i < j) || j >= window_) throw DomainError("sample edges need i < j < window");
    present_[i * window_ + j] = on ? 1 : 0;
  }

  bool has_edge(std::size_t i, std::size_t j) const noexcept {
    return i < j && j < window_ && present_[i * window_ + j] != 0;
  }

  std::size_t edge_count() const noexcept {
    return static_cast<std::size_t>(std::count(present_.begin(), present_.end(), char{1}));
  }

  // Edges oriented from the smaller to the larger index.
  DirectedGraph to_graph() const {
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < window_; ++i)
      for (std::size_t j = i + 1; j < window_; ++j)
        if (present_[i * window_ + j]) edges.emplace_back(i, j);
    return DirectedGraph(window_, std::move(edges));
  }

  // Edge count of the longest path (always finite: the sample is acyclic).
  std::size_t longest_path() const { return longest_path_length(to_graph()).value(); }

  std::size_t clique_number() const { return randsub::clique_number(to_graph()); }

 private:
  std::size_t window_;
  std::vector<char> present_;
};

// Edge (i, j) iff x_i > x_j: no path has p edges when x uses p symbols.
inline SubgraphSample order_subgraph(const Word& x) {
  SubgraphSample s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if (x[i] > x[j]) s.set_edge(i, j);
  return s;
}

// Edge (i, j) iff x_i != x_j: no clique has p + 1 vertices when x uses p symbols.
inline SubgraphSample neq_subgraph(const Word& x) {
  SubgraphSample s(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j)
      if (x[i] != x[j]) s.set_edge(i, j);
  return s;
}

inline double lambda_p(std::size_t p) {
  if (p == 0) throw DomainError("path length must be positive");
  return 0.5 * (1.0 - 1.0 / static_cast<double>(p));
}

// Lower bound on the probability of a path with p edges when every edge has
// probability >= lambda, clamped to [0, 1].
inline double finpath_lower_bound(double lambda, std::size_t p) {
  const double lp = lambda_p(p);
  return std::clamp((lambda - lp) / (1.0 - lp), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Finitely branching hosts: random subgraphs without long paths whose edges
// are nevertheless present with probability close to one.

// Complete binary tree of the given depth: vertex v has children 2v+1, 2v+2;
// edges point away from the root; root-to-leaf paths have `depth` edges.
inline DirectedGraph binary_tree(std::size_t depth) {
  if (depth >= 30) throw DomainError("binary tree depth too large");
  const std::size_t n = (std::size_t{1} << (depth + 1)) - 1;
  std::vector<Edge> edges;
  for (Vertex v = 0; 2 * v + 2 < n; ++v) {
    edges.emplace_back(v, 2 * v + 1);
    edges.emplace_back(v, 2 * v + 2);
  }
  return DirectedGraph(n, std::move(edges));
}

inline std::size_t tree_depth_of(Vertex v) {
  std::size_t d = 0;
  for (std::size_t x = v + 1; x > 1; x >>= 1) ++d;
  return d;
}

// Colour of each edge of a binary tree (aligned with tree.edges()): the depth
// of its upper endpoint. Every root-to-leaf path meets every colour.
inline std::vector<std::size_t> depth_coloring(const DirectedGraph& tree) {
  std::vector<std::size_t> colors;
  colors.reserve(tree.edge_count());
  for (const auto& [a, b] : tree.edges()) colors.push_back(tree_depth_of(a));
  return colors;
}

// Z_n = {n}, n < count.
inline std::vector<std::vector<std::size_t>> singleton_zones(std::size_t count) {
  std::vector<std::vector<std::size_t>> zones(count);
  for (std::size_t n = 0; n < count; ++n) zones[n] = {n};
  return zones;
}

// The dyadic partition of the naturals into infinite sets,
// Z_n = {c : c + 1 = 2^n * odd}, truncated to colours < color_count.
inline std::vector<std::vector<std::size_t>> dyadic_zones(std::size_t zone_count, std::size_t color_count) {
  std::vector<std::vector<std::size_t>> zones(zone_count);
  for (std::size_t c = 0; c < color_count; ++c) {
    const auto n = static_cast<std::size_t>(std::countr_zero(static_cast<std::uint64_t>(c + 1)));
    if (n < zone_count) zones[n].push_back(c);
  }
  return zones;
}

// Omega = {0, ..., N-1} with atom probabilities mu; sample n keeps exactly the
// host edges whose colour is not in zone Z_n. Each colour lies in at most one
// zone, so each edge is missing with probability at most max mu < epsilon.
class FinbModel {
 public:
  FinbModel(DirectedGraph host, std::vector<std::size_t> edge_colors,
            std::vector<std::vector<std::size_t>> zones, SimplexDist atoms, double epsilon)
      : host_(std::move(host)),
        colors_(std::move(edge_colors)),
        zones_(std::move(zones)),
        atoms_(std::move(atoms)),
        epsilon_(epsilon) {
    if (!(epsilon_ > 0.0)) throw DomainError("epsilon must be positive");
    if (colors_.size() != host_.edge_count()) throw DomainError("one colour per host edge required");
    if (zones_.size() != atoms_.size()) throw DomainError("one zone per atom required");
    for (std::size_t n = 0; n < atoms_.size(); ++n) {
      if (!(atoms_[n] < epsilon_)) {
        throw DomainError("atom " + std::to_string(n) + " has probability >= epsilon");
      }
    }
    std::size_t max_color = 0;
    for (std::size_t c : colors_) max_color = std::max(max_color, c);
    zone_of_color_.assign(max_color + 1, kNoZone);
    for (std::size_t n = 0; n < zones_.size(); ++n) {
      for (std::size_t c : zones_[n]) {
        if (c > max_color) continue;  // colours absent from the host
        if (zone_of_color_[c] != kNoZone) {
          throw DomainError("zones overlap at colour " + std::to_string(c));
        }
        zone_of_color_[c] = n;
      }
    }
  }

  // Uniform atoms of mass epsilon/2 (there are ceil(2/epsilon) of them).
  static FinbModel on_binary_tree(std::size_t depth, double epsilon,
                                  std::optional<std::vector<std::vector<std::size_t>>> zones = std::nullopt) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
    auto tree = binary_tree(depth);
    auto colors = depth_coloring(tree);
    const auto n_atoms = static_cast<std::size_t>(std::ceil(2.0 / epsilon - 1e-9));
    auto z = zones ? std::move(*zones) : dyadic_zones(n_atoms, depth);
    if (z.size() != n_atoms) throw DomainError("zone count must equal the atom count");
    return FinbModel(std::move(tree), std::move(colors), std::move(z), SimplexDist::uniform(n_atoms), epsilon);
  }

  const DirectedGraph& host() const noexcept { return host_; }
  const std::vector<std::size_t>& edge_colors() const noexcept { return colors_; }
  const std::vector<std::vector<std::size_t>>& zones() const noexcept { return zones_; }
  const SimplexDist& atoms() const noexcept { return atoms_; }
  double epsilon() const noexcept { return epsilon_; }

  std::size_t draw(Rng& rng) const { return sample_symbol(atoms_, rng); }

  // X(n): host edges whose colour is outside Z_n, as a spanning subgraph.
  DirectedGraph sample(std::size_t atom) const {
    if (atom >= atoms_.size()) throw DomainError("atom index out of range");
    std::vector<Edge> kept;
    const auto& edges = host_.edges();
    for (std::size_t e = 0; e < edges.size(); ++e)
      if (zone_of_color_[colors_[e]] != atom) kept.push_back(edges[e]);
    return DirectedGraph(host_.vertex_count(), std::move(kept));
  }

  // Exact mu(X_e) for edge index e of host().edges().
  double edge_probability(std::size_t e) const {
    const std::size_t zone = zone_of_color_.at(colors_.at(e));
    return zone == kNoZone ? 1.0 : 1.0 - atoms_[zone];
  }

 private:
  static constexpr std::size_t kNoZone = std::numeric_limits<std::size_t>::max();

  DirectedGraph host_;
  std::vector<std::size_t> colors_;
  std::vector<std::vector<std::size_t>> zones_;
  SimplexDist atoms_;
  double epsilon_;
  std::vector<std::size_t> zone_of_color_;
};

// True iff some path from the root (vertex 0) reaches a leaf of the host tree.
inline bool has_root_to_leaf_path(const DirectedGraph& host, const DirectedGraph& sample) {
  if (host.vertex_count() == 0) return false;
  std::vector<Vertex> stack{0};
  std::vector<char> seen(host.vertex_count(), 0);
  seen[0] = 1;
  while (!stack.empty()) {
    const Vertex v = stack.back();
    stack.pop_back();
    if (host.out_neighbors(v).empty()) return true;
    for (Vertex w : sample.out_neighbors(v)) {
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Real-indexed hosts: independent uniform coordinates on a grid of reals,
// edge (i, j) for grid points i < j iff x_i > x_j + epsilon.

class RealsModel {
 public:
  RealsModel(double epsilon, std::vector<double> grid) : epsilon_(epsilon), grid_(std::move(grid)) {
    if (!(epsilon_ > 0.0) || !(epsilon_ < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
    for (std::size_t t = 1; t < grid_.size(); ++t)
      if (!(grid_[t - 1] < grid_[t])) throw DomainError("grid must be strictly increasing");
  }

  double epsilon() const noexcept { return epsilon_; }
  const std::vector<double>& grid() const noexcept { return grid_; }

  // Lebesgue measure of {x_i > x_j + epsilon}.
  double edge_probability() const noexcept { return (1.0 - epsilon_) * (1.0 - epsilon_) / 2.0; }

  std::vector<double> draw(Rng& rng) const {
    std::vector<double> x(grid_.size());
    for (double& v : x) v = rng.uniform();
    return x;
  }

  SubgraphSample subgraph(const std::vector<double>& x) const {
    if (x.size() != grid_.size()) throw DomainError("coordinate vector does not match the grid");
    SubgraphSample s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = i + 1; j < x.size(); ++j)
        if (x[i] > x[j] + epsilon_) s.set_edge(i, j);
    return s;
  }

  // Chains of N consecutive events are empty once N > 1/epsilon: the
  // coordinates along a path drop by more than epsilon per edge.
  std::size_t max_chain_edges() const noexcept {
    return static_cast<std::size_t>(std::floor(1.0 / epsilon_));
  }

 private:
  double epsilon_;
  std::vector<double> grid_;
};

// ---------------------------------------------------------------------------
// Monte Carlo threshold experiments

// Every edge of the window present independently with probability q.
struct IndependentEdges {
  double q = 0.0;
};

struct ThresholdReport {
  std::size_t p = 0;            // target path length, in edges
  double lambda_p = 0.0;        // (1 - 1/p) / 2
  double min_edge_prob = 0.0;   // smallest empirical edge frequency over the window
  double mu_path = 0.0;         // fraction of samples with a path of >= p edges
  double bound = 0.0;           // (min_edge_prob - lambda_p) / (1 - lambda_p), clamped
  double stderr_mu = 0.0;       // sqrt(mu (1 - mu) / trials)
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t window = 0;
  std::optional<double> exact_min_edge_prob;  // when the model gives it in closed form
  std::optional<double> exact_bound;
  std::vector<double> edge_frequency;         // row-major over pairs i < j
  std::vector<std::size_t> longest_paths;     // per trial
};

// Fraction of trials whose longest path has at least p edges.
inline double path_fraction(const std::vector<std::size_t>& longest, std::size_t p) {
  if (longest.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t l : longest)
    if (l >= p) ++hits;
  return static_cast<double>(hits) / static_cast<double>(longest.size());
}

namespace detail {

inline void check_experiment(std::size_t p, std::size_t window, std::size_t trials) {
  if (trials == 0) throw DomainError("trials must be positive");
  if (p == 0) throw DomainError("target path length must be positive");
  if (window < p + 1) throw DomainError("window must be at least p + 1");
}

template <class Draw>
ThresholdReport run_path_experiment(std::size_t p, std::size_t window, std::size_t trials, std::uint64_t seed,
                                    Draw&& draw) {
  ThresholdReport r;
  r.p = p;
  r.lambda_p = lambda_p(p);
  r.trials = trials;
  r.seed = seed;
  r.window = window;
  std::vector<std::size_t> counts(window * window, 0);
  r.longest_paths.reserve(trials);
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(seed, t);
    const SubgraphSample s = draw(rng);
    for (std::size_t i = 0; i < window; ++i)
      for (std::size_t j = i + 1; j < window; ++j)
        if (s.has_edge(i, j)) ++counts[i * window + j];
    r.longest_paths.push_back(s.longest_path());
  }
  double min_freq = 1.0;
  for (std::size_t i = 0; i < window; ++i) {
    for (std::size_t j = i + 1; j < window; ++j) {
      const double f = static_cast<double>(counts[i * window + j]) / static_cast<double>(trials);
      r.edge_frequency.push_back(f);
      min_freq = std::min(min_freq, f);
    }
  }
  r.min_edge_prob = min_freq;
  r.mu_path = path_fraction(r.longest_paths, p);
  r.bound = finpath_lower_bound(r.min_edge_prob, p);
  r.stderr_mu = std::sqrt(r.mu_path * (1.0 - r.mu_path) / static_cast<double>(trials));
  return r;
}

}  // namespace detail

// Samples words from the model, takes their order subgraphs on [0, window).
inline ThresholdReport estimate_path_probability(const MeasureModel& model, std::size_t p, std::size_t window,
                                                 std::size_t trials, std::uint64_t seed) {
  detail::check_experiment(p, window, trials);
  if (window > model.window()) throw DomainError("experiment window exceeds the model window");
  auto r = detail::run_path_experiment(p, window, trials, seed, [&](Rng& rng) {
    Word x = sample(model, rng);
    x.resize(window);
    return order_subgraph(x);
  });
  double exact = 1.0;
  for (std::size_t i = 0; i < window; ++i)
    for (std::size_t j = i + 1; j < window; ++j) exact = std::min(exact, event_prob(model, EventSpec::order(i, j)));
  r.exact_min_edge_prob = exact;
  r.exact_bound = finpath_lower_bound(exact, p);
  return r;
}

inline ThresholdReport estimate_path_probability(const IndependentEdges& edges, std::size_t p, std::size_t window,
                                                 std::size_t trials, std::uint64_t seed) {
  detail::check_experiment(p, window, trials);
  if (!(edges.q >= 0.0 && edges.q <= 1.0)) throw DomainError("edge probability must lie in [0, 1]");
  auto r = detail::run_path_experiment(p, window, trials, seed, [&](Rng& rng) {
    SubgraphSample s(window);
    for (std::size_t i = 0; i < window; ++i)
      for (std::size_t j = i + 1; j < window; ++j)
        if (rng.bernoulli(edges.q)) s.set_edge(i, j);
    return s;
  });
  r.exact_min_edge_prob = edges.q;
  r.exact_bound = finpath_lower_bound(edges.q, p);
  return r;
}

// Empirical mu(P) plus `sigmas` standard errors reaches the lower bound.
inline bool verify_finpath_bound(const ThresholdReport& report, double sigmas) {
  return report.mu_path + sigmas * report.stderr_mu >= report.bound;
}

// Fraction of independent-edge samples on [0, window) whose chromatic number
// is at least p.
inline double chromatic_fraction(double q, std::size_t p, std::size_t window, std::size_t trials,
                                 std::uint64_t seed) {
  if (trials == 0) throw DomainError("trials must be positive");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("edge probability must lie in [0, 1]");
  std::size_t hits = 0;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(seed, t);
    SubgraphSample s(window);
    for (std::size_t i = 0; i < window; ++i)
      for (std::size_t j = i + 1; j < window; ++j)
        if (rng.bernoulli(q)) s.set_edge(i, j);
    if (chromatic_number(s.to_graph()) >= p) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(trials);
}

}  // namespace randsub
