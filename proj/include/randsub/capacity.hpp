#pragma once

// Capacity of a finite directed graph F:
//
//   c0(F) = sup over probability vectors lambda on V_F of
//           sum_{(a,b) in E_F} lambda_a * lambda_b .
//
// Three routes: closed forms (loops, symmetric and antisymmetric graphs),
// an exhaustive lattice/clique oracle for tiny graphs, and multi-start
// replicator ascent for everything else.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "randsub/errors.hpp"
#include "randsub/graph.hpp"
#include "randsub/rng.hpp"

namespace randsub {

inline constexpr double kSimplexTolerance = 1e-12;

// A probability vector: nonnegative entries summing to one.
class SimplexDist {
 public:
  SimplexDist() = default;

  explicit SimplexDist(std::vector<double> weights) : weights_(std::move(weights)) {
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("simplex weight must be finite and >= 0");
      total += w;
    }
    if (std::abs(total - 1.0) > kSimplexTolerance) {
      throw DomainError("simplex weights sum to " + std::to_string(total) + ", not 1");
    }
  }

  static SimplexDist uniform(std::size_t n) {
    if (n == 0) throw DomainError("uniform distribution on zero points");
    return SimplexDist(std::vector<double>(n, 1.0 / static_cast<double>(n)));
  }

  static SimplexDist uniform_on(std::size_t n, const std::vector<Vertex>& support) {
    if (support.empty()) throw DomainError("uniform distribution on an empty support");
    std::vector<double> w(n, 0.0);
    for (Vertex v : support) w.at(v) = 1.0 / static_cast<double>(support.size());
    return SimplexDist(std::move(w));
  }

  static SimplexDist point_mass(std::size_t n, std::size_t at) {
    std::vector<double> w(n, 0.0);
    w.at(at) = 1.0;
    return SimplexDist(std::move(w));
  }

  // Rescales nonnegative weights with a positive sum.
  static SimplexDist normalized(std::vector<double> w) {
    double total = 0.0;
    for (double x : w) total += x;
    if (!(total > 0.0)) throw DomainError("cannot normalize weights with zero total");
    for (double& x : w) x /= total;
    return SimplexDist(std::move(w));
  }

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_.at(i); }
  const std::vector<double>& weights() const noexcept { return weights_; }

 private:
  std::vector<double> weights_;
};

enum class CapacityMethod { kClosedForm, kSupportEnum, kNumeric };

inline const char* to_string(CapacityMethod m) {
  switch (m) {
    case CapacityMethod::kClosedForm: return "CLOSED_FORM";
    case CapacityMethod::kSupportEnum: return "SUPPORT_ENUM";
    case CapacityMethod::kNumeric: return "NUMERIC";
  }
  return "?";
}

struct CapacityResult {
  double value = 0.0;
  SimplexDist maximizer;
  CapacityMethod method = CapacityMethod::kNumeric;
  // Clique whose uniform distribution attains `value`, when known.
  std::optional<std::vector<Vertex>> certificate;
};

struct OptimizerConfig {
  std::uint64_t seed = kDefaultSeed;
  std::size_t restarts = 64;           // random Dirichlet(1,...,1) starts
  std::size_t max_iterations = 100000; // per restart
  double tolerance = 1e-14;            // stop once one step improves less than this
  bool clique_seeds = true;            // also start from maximal cliques and loop vertices
  bool polish = true;                  // solve the stationarity system on the final support
};

// No restart met the stopping rule within the iteration budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, CapacityResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const CapacityResult& best_so_far() const noexcept { return best_; }

 private:
  CapacityResult best_;
};

inline double edge_quadratic_form(const DirectedGraph& f, const std::vector<double>& lambda) {
  if (lambda.size() != f.vertex_count()) {
    throw DomainError("distribution has " + std::to_string(lambda.size()) + " entries, graph has " +
                      std::to_string(f.vertex_count()) + " vertices");
  }
  double total = 0.0;
  for (const auto& [a, b] : f.edges()) total += lambda[a] * lambda[b];
  return total;
}

inline double edge_quadratic_form(const DirectedGraph& f, const SimplexDist& lambda) {
  return edge_quadratic_form(f, lambda.weights());
}

// Closed forms: 1 with a loop; 1 - 1/cl for symmetric graphs; (1 - 1/cl)/2
// for antisymmetric graphs. Mixed graphs have none.
inline std::optional<double> capacity_closed_form(const DirectedGraph& f) {
  if (f.vertex_count() == 0) return std::nullopt;
  if (!is_irreflexive(f)) return 1.0;
  const double cl = static_cast<double>(clique_number(f));
  if (is_symmetric(f)) return 1.0 - 1.0 / cl;
  if (is_antisymmetric(f)) return 0.5 * (1.0 - 1.0 / cl);
  return std::nullopt;
}

// The closed form together with a maximizer attaining it.
inline std::optional<CapacityResult> capacity_closed_form_result(const DirectedGraph& f) {
  const auto value = capacity_closed_form(f);
  if (!value) return std::nullopt;
  const std::size_t n = f.vertex_count();
  for (Vertex a = 0; a < n; ++a) {
    if (f.has_loop(a)) {
      return CapacityResult{*value, SimplexDist::point_mass(n, a), CapacityMethod::kClosedForm,
                            std::vector<Vertex>{a}};
    }
  }
  auto clique = maximum_clique(f);
  return CapacityResult{*value, SimplexDist::uniform_on(n, clique), CapacityMethod::kClosedForm,
                        std::move(clique)};
}

namespace detail {

// m_ab = number of directed edges between a and b (either direction),
// loops counted twice, so that the quadratic form equals lambda^T M lambda / 2.
inline std::vector<double> symmetrized_matrix(const DirectedGraph& f) {
  const std::size_t n = f.vertex_count();
  std::vector<double> m(n * n, 0.0);
  for (const auto& [a, b] : f.edges()) {
    m[a * n + b] += 1.0;
    m[b * n + a] += 1.0;
  }
  return m;
}

inline void mat_vec(const std::vector<double>& m, const std::vector<double>& x, std::vector<double>& out) {
  const std::size_t n = x.size();
  for (std::size_t a = 0; a < n; ++a) {
    double s = 0.0;
    const double* row = &m[a * n];
    for (std::size_t b = 0; b < n; ++b) s += row[b] * x[b];
    out[a] = s;
  }
}

// Solves the stationarity system of the quadratic form restricted to the
// current support S: M_S x = c 1, sum x = 1. Twin vertices make the system
// singular; free unknowns keep their current values. Returns the solution
// when it is a valid point of the simplex.
inline std::optional<std::vector<double>> polish_on_support(const std::vector<double>& m,
                                                            const std::vector<double>& lambda,
                                                            double support_threshold = 1e-9) {
  const std::size_t n = lambda.size();
  std::vector<std::size_t> s;
  for (std::size_t a = 0; a < n; ++a)
    if (lambda[a] > support_threshold) s.push_back(a);
  const std::size_t k = s.size();
  if (k == 0) return std::nullopt;
  // Unknowns x_1..x_k and c; augmented (k+1) x (k+2) matrix, reduced to
  // row echelon form with partial pivoting.
  const std::size_t rows = k + 1;
  const std::size_t cols = k + 2;
  std::vector<double> a(rows * cols, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) a[i * cols + j] = m[s[i] * n + s[j]];
    a[i * cols + k] = -1.0;
  }
  for (std::size_t j = 0; j < k; ++j) a[k * cols + j] = 1.0;
  a[k * cols + k + 1] = 1.0;

  constexpr double kPivotTolerance = 1e-10;
  std::vector<std::size_t> pivot_col;  // pivot column of each reduced row
  std::size_t row = 0;
  for (std::size_t col = 0; col <= k && row < rows; ++col) {
    std::size_t pivot = row;
    for (std::size_t r = row + 1; r < rows; ++r)
      if (std::abs(a[r * cols + col]) > std::abs(a[pivot * cols + col])) pivot = r;
    if (std::abs(a[pivot * cols + col]) < kPivotTolerance) continue;
    if (pivot != row)
      for (std::size_t j = 0; j < cols; ++j) std::swap(a[pivot * cols + j], a[row * cols + j]);
    const double lead = a[row * cols + col];
    for (std::size_t j = 0; j < cols; ++j) a[row * cols + j] /= lead;
    for (std::size_t r = 0; r < rows; ++r) {
      if (r == row) continue;
      const double factor = a[r * cols + col];
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < cols; ++j) a[r * cols + j] -= factor * a[row * cols + j];
    }
    pivot_col.push_back(col);
    ++row;
  }
  for (std::size_t r = row; r < rows; ++r)
    if (std::abs(a[r * cols + k + 1]) > 1e-9) return std::nullopt;  // inconsistent

  std::vector<double> unknown(k + 1, 0.0);
  std::vector<char> is_pivot(k + 1, 0);
  for (std::size_t c : pivot_col) is_pivot[c] = 1;
  for (std::size_t j = 0; j < k; ++j)
    if (!is_pivot[j]) unknown[j] = lambda[s[j]];
  for (std::size_t r = 0; r < pivot_col.size(); ++r) {
    double v = a[r * cols + k + 1];
    for (std::size_t j = 0; j <= k; ++j)
      if (!is_pivot[j]) v -= a[r * cols + j] * unknown[j];
    unknown[pivot_col[r]] = v;
  }
  std::vector<double> out(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(unknown[i] >= 0.0)) return std::nullopt;
    out[s[i]] = unknown[i];
    total += unknown[i];
  }
  if (!(total > 0.0)) return std::nullopt;
  for (double& x : out) x /= total;
  return out;
}

// lambda^T M lambda when lambda is a KKT point of the simplex program:
// (M lambda)_a <= lambda^T M lambda for every a.
inline std::optional<double> kkt_twice_value(const std::vector<double>& m, const std::vector<double>& lambda) {
  std::vector<double> g(lambda.size());
  mat_vec(m, lambda, g);
  double twice = 0.0;
  for (std::size_t a = 0; a < lambda.size(); ++a) twice += lambda[a] * g[a];
  for (double ga : g)
    if (ga > twice + 1e-12) return std::nullopt;
  return twice;
}

inline constexpr std::size_t kPolishInterval = 32;

// Tries the supports formed by the j heaviest coordinates, j = 1..n, and
// returns the first stationary point that is a KKT point no worse than
// `value`, with its lambda^T M lambda.
inline std::optional<std::pair<std::vector<double>, double>> polish_to_kkt(
    const std::vector<double>& m, const std::vector<double>& lambda, double value) {
  const std::size_t n = lambda.size();
  std::vector<std::size_t> order(n);
  for (std::size_t a = 0; a < n; ++a) order[a] = a;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return lambda[x] > lambda[y]; });
  std::vector<double> masked(n, 0.0);
  for (std::size_t j = 0; j < n && lambda[order[j]] > 0.0; ++j) {
    masked[order[j]] = lambda[order[j]];
    auto p = polish_on_support(m, masked, 0.0);
    if (!p) continue;
    auto t = kkt_twice_value(m, *p);
    if (t && 0.5 * *t >= value - 1e-12) return std::make_pair(std::move(*p), *t);
  }
  return std::nullopt;
}

struct AscentOutcome {
  std::vector<double> lambda;
  double value = 0.0;
  bool converged = false;
};

// Replicator ascent lambda_a <- lambda_a (M lambda)_a / (lambda^T M lambda).
inline AscentOutcome replicator_ascent(const std::vector<double>& m, std::vector<double> lambda,
                                       const std::vector<char>& zero_row, const OptimizerConfig& cfg) {
  const std::size_t n = lambda.size();
  const std::vector<double> start = lambda;
  // Vertices touching no edge can never carry mass usefully; move their mass
  // proportionally onto the remaining support before iterating.
  double kept = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    if (zero_row[a]) lambda[a] = 0.0;
    kept += lambda[a];
  }
  if (!(kept > 0.0)) return {start, 0.0, true};
  for (double& x : lambda) x /= kept;

  std::vector<double> g(n);
  mat_vec(m, lambda, g);
  double twice = 0.0;
  for (std::size_t a = 0; a < n; ++a) twice += lambda[a] * g[a];
  if (!(twice > 0.0)) return {std::move(lambda), 0.0, true};

  double value = 0.5 * twice;
  for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
    double total = 0.0;
    for (std::size_t a = 0; a < n; ++a) {
      lambda[a] *= g[a] / twice;
      total += lambda[a];
    }
    for (double& x : lambda) x /= total;
    mat_vec(m, lambda, g);
    twice = 0.0;
    for (std::size_t a = 0; a < n; ++a) twice += lambda[a] * g[a];
    const double next = 0.5 * twice;
    const double gain = next - value;
    value = std::max(value, next);
    if (gain < cfg.tolerance) return {std::move(lambda), value, true};
    // Near degenerate maxima the ascent is only sublinear; jump to the exact
    // stationary point of the current support once it is a KKT point.
    if (cfg.polish && (it + 1) % kPolishInterval == 0) {
      if (auto p = polish_to_kkt(m, lambda, value)) {
        const double v = 0.5 * p->second;
        return {std::move(p->first), std::max(value, v), true};
      }
    }
  }
  return {std::move(lambda), value, false};
}

}  // namespace detail

// Multi-start replicator ascent. The value is attained by the returned
// maximizer, hence a certified lower bound on c0(F).
inline CapacityResult capacity_numeric(const DirectedGraph& f, const OptimizerConfig& cfg = {}) {
  const std::size_t n = f.vertex_count();
  if (n == 0) throw DomainError("capacity of the empty graph");
  const auto m = detail::symmetrized_matrix(f);
  std::vector<char> zero_row(n, 1);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (m[a * n + b] != 0.0) zero_row[a] = 0;

  std::vector<std::vector<double>> starts;
  std::vector<std::optional<std::vector<Vertex>>> start_cliques;
  if (cfg.clique_seeds && n <= kMaskVertexLimit) {
    for (auto& clique : maximal_cliques(f)) {
      starts.push_back(SimplexDist::uniform_on(n, clique).weights());
      start_cliques.emplace_back(std::move(clique));
    }
  }
  if (cfg.clique_seeds) {
    for (Vertex a = 0; a < n; ++a) {
      if (!f.has_loop(a)) continue;
      starts.push_back(SimplexDist::point_mass(n, a).weights());
      start_cliques.emplace_back(std::vector<Vertex>{a});
    }
  }
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    Rng rng(cfg.seed, r);
    std::vector<double> w(n);
    double total = 0.0;
    for (double& x : w) total += (x = rng.exponential());
    for (double& x : w) x /= total;
    starts.push_back(std::move(w));
    start_cliques.emplace_back(std::nullopt);
  }

  CapacityResult best{-1.0, SimplexDist::uniform(n), CapacityMethod::kNumeric, std::nullopt};
  bool any_converged = false;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    auto outcome = detail::replicator_ascent(m, starts[s], zero_row, cfg);
    any_converged = any_converged || outcome.converged;
    std::vector<double> lambda = std::move(outcome.lambda);
    double value = edge_quadratic_form(f, lambda);
    if (cfg.polish) {
      if (auto p = detail::polish_on_support(m, lambda)) {
        const double pv = edge_quadratic_form(f, *p);
        if (pv > value) {
          value = pv;
          lambda = std::move(*p);
        }
      }
    }
    if (value > best.value) {
      best.value = value;
      best.maximizer = SimplexDist::normalized(std::move(lambda));
      best.certificate = std::nullopt;
      if (start_cliques[s]) {
        // The ascent leaves a uniform clique point fixed when it is stationary.
        const auto& clique = *start_cliques[s];
        const double k = static_cast<double>(clique.size());
        bool uniform = true;
        for (Vertex v : clique) uniform = uniform && std::abs(best.maximizer[v] - 1.0 / k) < 1e-12;
        if (uniform) best.certificate = clique;
      }
    }
  }
  best.value = std::clamp(best.value, 0.0, 1.0);
  if (!any_converged) {
    throw ConvergenceError("no restart converged within " + std::to_string(cfg.max_iterations) +
                               " iterations",
                           best);
  }
  return best;
}

inline constexpr std::size_t kSupportEnumVertexLimit = 6;

// Exhaustive oracle: every lattice point with coordinates in
// {0, 1/K, ..., 1} and the uniform distribution on every clique.
inline CapacityResult capacity_support_enum(const DirectedGraph& f, std::size_t grid_steps = 60) {
  const std::size_t n = f.vertex_count();
  if (n == 0) throw DomainError("capacity of the empty graph");
  if (n > kSupportEnumVertexLimit) {
    throw DomainError("support enumeration is limited to " + std::to_string(kSupportEnumVertexLimit) +
                      " vertices");
  }
  if (grid_steps == 0) throw DomainError("grid_steps must be positive");

  CapacityResult best{-1.0, SimplexDist::uniform(n), CapacityMethod::kSupportEnum, std::nullopt};

  // Cliques (including single vertices, which matter when they carry a loop).
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const auto vs = detail::mask_vertices(mask);
    if (!is_clique(f, vs)) continue;
    const auto dist = SimplexDist::uniform_on(n, vs);
    const double v = edge_quadratic_form(f, dist);
    if (v > best.value) best = {v, dist, CapacityMethod::kSupportEnum, vs};
  }

  // Lattice compositions of grid_steps into n parts.
  std::vector<std::size_t> counts(n, 0);
  std::vector<double> lambda(n);
  const double step = 1.0 / static_cast<double>(grid_steps);
  std::vector<std::size_t> best_counts;
  auto visit = [&](auto&& self, std::size_t index, std::size_t remaining) -> void {
    if (index + 1 == n) {
      counts[index] = remaining;
      for (std::size_t a = 0; a < n; ++a) lambda[a] = static_cast<double>(counts[a]) * step;
      double v = 0.0;
      for (const auto& [a, b] : f.edges()) v += lambda[a] * lambda[b];
      if (v > best.value) {
        best.value = v;
        best_counts = counts;
      }
      return;
    }
    for (std::size_t c = 0; c <= remaining; ++c) {
      counts[index] = c;
      self(self, index + 1, remaining - c);
    }
  };
  const double before = best.value;
  visit(visit, 0, grid_steps);
  if (best.value > before) {
    std::vector<double> w(n);
    for (std::size_t a = 0; a < n; ++a) w[a] = static_cast<double>(best_counts[a]);
    best.maximizer = SimplexDist::normalized(std::move(w));
    best.certificate = std::nullopt;
  }
  best.value = std::max(best.value, 0.0);
  return best;
}

// Closed form when one exists, otherwise the numeric lower bound.
inline CapacityResult capacity_auto(const DirectedGraph& f, const OptimizerConfig& cfg = {}) {
  if (f.vertex_count() == 0) throw DomainError("capacity of the empty graph");
  if (auto r = capacity_closed_form_result(f)) return *r;
  return capacity_numeric(f, cfg);
}

// Threshold for a random subgraph of the complete graph on the naturals to
// admit no morphism into F; it equals the capacity of F.
inline double relative_capacity_nn(const DirectedGraph& f, const OptimizerConfig& cfg = {}) {
  return capacity_auto(f, cfg).value;
}

// Stationarity residual for symmetric irreflexive F: at a maximizer every
// vertex of the support has neighbour mass equal to the capacity.
inline double kkt_residual(const DirectedGraph& f, const SimplexDist& lambda) {
  if (!is_symmetric(f) || !is_irreflexive(f)) {
    throw DomainError("kkt_residual requires a symmetric irreflexive graph");
  }
  const double value = edge_quadratic_form(f, lambda);
  double worst = 0.0;
  for (Vertex a = 0; a < f.vertex_count(); ++a) {
    if (lambda[a] <= 0.0) continue;
    double s = 0.0;
    for (Vertex b : f.out_neighbors(a)) s += lambda[b];
    worst = std::max(worst, std::abs(s - value));
  }
  return worst;
}

}  // namespace randsub
