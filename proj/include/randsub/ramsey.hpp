#pragma once

// Finite-scale Ramsey extraction for functions on increasing k-tuples.
//
//  * extract_convergent  - index set J on which every partial limit exists,
//                          with deviation eps / 2^pos certified on J;
//  * monotone_metric     - reindex a metric on N u {inf} to a monotone one;
//  * lipschitz_reindex   - increasing sigma making f o sigma_* 1-Lipschitz;
//  * intersect_extract   - J on which the events indexed by [J]^k keep a
//                          large common intersection.
//
// The source objects are infinite; here every guarantee is restated on the
// finite domain that is returned, and checked by full enumeration.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "randsub/errors.hpp"

namespace randsub {

using Tuple = std::vector<std::size_t>;

// ---------------------------------------------------------------------------
// Combinatorics of increasing tuples

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    const std::uint64_t num = n - k + i;
    if (out > std::numeric_limits<std::uint64_t>::max() / num) throw DomainError("binomial overflow");
    out = out * num / i;
  }
  return out;
}

// Calls fn(tuple) for every increasing k-tuple of `items`, in lexicographic order.
template <class Fn>
void for_each_increasing_tuple(const std::vector<std::size_t>& items, std::size_t k, Fn&& fn) {
  const std::size_t n = items.size();
  if (k > n) return;
  std::vector<std::size_t> pos(k);
  for (std::size_t i = 0; i < k; ++i) pos[i] = i;
  Tuple t(k);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) t[i] = items[pos[i]];
    fn(static_cast<const Tuple&>(t));
    std::size_t i = k;
    while (i > 0 && pos[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++pos[i - 1];
    for (std::size_t j = i; j < k; ++j) pos[j] = pos[j - 1] + 1;
  }
}

inline std::vector<std::size_t> iota_indices(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// ---------------------------------------------------------------------------
// Metric spaces

// Finite metric space: Euclidean vectors or an explicit distance matrix.
class MetricPoints {
 public:
  static MetricPoints euclidean(std::vector<std::vector<double>> coords) {
    if (coords.empty()) throw DomainError("metric space needs at least one point");
    const std::size_t dim = coords.front().size();
    for (const auto& c : coords)
      if (c.size() != dim) throw DomainError("points have different dimensions");
    MetricPoints m;
    m.size_ = coords.size();
    m.coords_ = std::move(coords);
    return m;
  }

  // Validates d(x,x) = 0, symmetry and the triangle inequality within `tol`.
  static MetricPoints from_matrix(std::vector<std::vector<double>> d, double tol = 1e-9) {
    const std::size_t n = d.size();
    if (n == 0) throw DomainError("metric space needs at least one point");
    for (const auto& row : d)
      if (row.size() != n) throw DomainError("distance matrix must be square");
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(d[i][i]) > tol) throw DomainError("distance matrix has a nonzero diagonal");
      for (std::size_t j = 0; j < n; ++j) {
        if (!(d[i][j] >= -tol) || !std::isfinite(d[i][j])) throw DomainError("distances must be finite and >= 0");
        if (std::abs(d[i][j] - d[j][i]) > tol) throw DomainError("distance matrix is not symmetric");
      }
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t l = 0; l < n; ++l)
          if (d[i][l] > d[i][j] + d[j][l] + tol) {
            throw DomainError("triangle inequality fails at (" + std::to_string(i) + "," + std::to_string(j) + "," +
                              std::to_string(l) + ")");
          }
    MetricPoints m;
    m.size_ = n;
    m.matrix_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m.matrix_[i * n + j] = d[i][j];
    return m;
  }

  std::size_t size() const noexcept { return size_; }
  bool has_coordinates() const noexcept { return !coords_.empty(); }
  const std::vector<std::vector<double>>& coordinates() const noexcept { return coords_; }

  double distance(std::size_t a, std::size_t b) const {
    if (a >= size_ || b >= size_) throw DomainError("point index out of range");
    if (!matrix_.empty()) return matrix_[a * size_ + b];
    double s = 0.0;
    for (std::size_t t = 0; t < coords_[a].size(); ++t) {
      const double diff = coords_[a][t] - coords_[b][t];
      s += diff * diff;
    }
    return std::sqrt(s);
  }

 private:
  MetricPoints() = default;
  std::size_t size_ = 0;
  std::vector<std::vector<double>> coords_;
  std::vector<double> matrix_;
};

// ---------------------------------------------------------------------------
// Tuple functions

// f : [n]^(k) -> points of M, stored as point indices.
class TupleFunction {
 public:
  // `values` lists f on every increasing k-tuple of [n] in lexicographic order.
  TupleFunction(std::size_t arity, std::size_t domain, std::vector<std::size_t> values)
      : arity_(arity), domain_(domain), values_(std::move(values)) {
    if (arity_ == 0) throw DomainError("tuple function arity must be positive");
    if (values_.size() != binomial(domain_, arity_)) {
      throw DomainError("tuple table has " + std::to_string(values_.size()) + " entries, expected " +
                        std::to_string(binomial(domain_, arity_)));
    }
    build_rank_table();
  }

  template <class Fn>
  static TupleFunction from_callable(std::size_t arity, std::size_t domain, Fn&& fn) {
    if (binomial(domain, arity) > 20'000'000) throw DomainError("tuple table too large");
    std::vector<std::size_t> values;
    values.reserve(binomial(domain, arity));
    for_each_increasing_tuple(iota_indices(domain), arity, [&](const Tuple& t) { values.push_back(fn(t)); });
    return TupleFunction(arity, domain, std::move(values));
  }

  std::size_t arity() const noexcept { return arity_; }
  std::size_t domain() const noexcept { return domain_; }
  const std::vector<std::size_t>& values() const noexcept { return values_; }

  // Lexicographic rank of an increasing tuple.
  std::size_t rank(const Tuple& t) const {
    if (t.size() != arity_) throw DomainError("tuple has the wrong arity");
    std::size_t r = 0;
    std::size_t prev = 0;
    for (std::size_t i = 0; i < arity_; ++i) {
      if (t[i] >= domain_ || (i > 0 && t[i] <= t[i - 1])) throw DomainError("tuple is not increasing in range");
      const std::size_t start = i == 0 ? 0 : prev + 1;
      // Tuples whose i-th entry lies in [start, t[i]) come first.
      r += offset_[i][t[i]] - offset_[i][start];
      prev = t[i];
    }
    return r;
  }

  std::size_t operator()(const Tuple& t) const { return values_[rank(t)]; }

 private:
  // offset_[i][v] = number of completions of positions i..k-1 whose i-th
  // entry is < v, i.e. sum_{u < v} C(n - 1 - u, k - 1 - i).
  void build_rank_table() {
    offset_.assign(arity_, std::vector<std::size_t>(domain_ + 1, 0));
    for (std::size_t i = 0; i < arity_; ++i)
      for (std::size_t v = 0; v < domain_; ++v)
        offset_[i][v + 1] = offset_[i][v] + binomial(domain_ - 1 - v, arity_ - 1 - i);
  }

  std::size_t arity_;
  std::size_t domain_;
  std::vector<std::size_t> values_;
  std::vector<std::vector<std::size_t>> offset_;
};

// ---------------------------------------------------------------------------
// Convergent extraction

struct ExtractionResult {
  std::size_t arity = 0;
  double epsilon = 0.0;
  std::vector<std::size_t> J;
  // Limit point x_P for every prefix P (|P| < k) over J that still has an
  // extension to a k-tuple of J; the empty prefix is the overall limit.
  std::map<Tuple, std::size_t> prefix_limits;
  // Max of d * 2^pos(j) over all certified pairs; at most epsilon.
  double achieved = 0.0;
};

struct ExtractionCheck {
  bool ok = false;
  double achieved = 0.0;     // max d * 2^pos over the checked pairs
  std::size_t checks = 0;
  std::string failure;       // first violated pair, if any
};

// Full enumeration of the schedule: with pos(i) the 0-based position of i in J,
//  * d(x_{T[:m]}, f(T)) <= eps / 2^pos(T[m]) for all T in [J]^k and m < k;
//  * d(x_P, x_{P+j}) <= eps / 2^pos(j) whenever both prefixes are recorded.
inline ExtractionCheck verify_extraction(const TupleFunction& f, const MetricPoints& m,
                                         const ExtractionResult& r) {
  ExtractionCheck out;
  out.ok = true;
  const std::size_t k = f.arity();
  std::map<std::size_t, std::size_t> pos;
  for (std::size_t t = 0; t < r.J.size(); ++t) pos[r.J[t]] = t;
  const double slack = r.epsilon * 1e-12 + 1e-15;
  auto check = [&](double d, std::size_t position, const std::string& what) {
    ++out.checks;
    const double scaled = std::ldexp(d, static_cast<int>(position));
    out.achieved = std::max(out.achieved, scaled);
    if (d > std::ldexp(r.epsilon, -static_cast<int>(position)) + slack && out.ok) {
      out.ok = false;
      out.failure = what;
    }
  };
  auto name = [](const Tuple& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
    return s + ")";
  };
  for_each_increasing_tuple(r.J, k, [&](const Tuple& t) {
    const std::size_t value = f(t);
    for (std::size_t mm = 0; mm < k; ++mm) {
      const Tuple prefix(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(mm));
      const auto it = r.prefix_limits.find(prefix);
      if (it == r.prefix_limits.end()) {
        if (out.ok) out.failure = "missing prefix limit " + name(prefix);
        out.ok = false;
        continue;
      }
      check(m.distance(value, it->second), pos.at(t[mm]), "value " + name(t) + " vs prefix " + name(prefix));
    }
  });
  for (const auto& [prefix, limit] : r.prefix_limits) {
    if (prefix.size() + 1 >= k) continue;
    for (std::size_t j : r.J) {
      if (!prefix.empty() && j <= prefix.back()) continue;
      Tuple longer = prefix;
      longer.push_back(j);
      const auto it = r.prefix_limits.find(longer);
      if (it == r.prefix_limits.end()) continue;
      check(m.distance(limit, it->second), pos.at(j), "limit " + name(prefix) + " vs " + name(longer));
    }
  }
  return out;
}

namespace detail {

struct ExtractionNode {
  std::size_t limit = 0;
  std::vector<std::size_t> seq;            // selected indices, increasing
  std::vector<ExtractionNode> children;    // parallel to seq when arity >= 2
};

// Builds, for the restriction h(T) = f(prefix + T) to increasing r-tuples of
// `pool`, a node whose sequence S satisfies, for every T in [S]^r and every
// m < r (positions taken within the nested sequences),
//   d(x_{T[:m]}, h(T)) <= eps 2^-(base + pos(T[m])),
// and the same bound between consecutive recorded limits.
class ConvergentExtractor {
 public:
  ConvergentExtractor(const TupleFunction& f, const MetricPoints& m, double eps) : f_(f), m_(m), eps_(eps) {}

  ExtractionNode run(std::size_t r, Tuple& prefix, const std::vector<std::size_t>& pool, std::size_t base) const {
    return r == 1 ? base_case(prefix, pool, base) : step(r, prefix, pool, base);
  }

 private:
  double bound(std::size_t level) const { return std::ldexp(eps_, -static_cast<int>(level)); }

  // Greedy in index order against every candidate limit; the greedy choice
  // is optimal for a fixed limit because the thresholds only shrink.
  ExtractionNode base_case(Tuple& prefix, const std::vector<std::size_t>& pool, std::size_t base) const {
    std::vector<std::size_t> values(pool.size());
    for (std::size_t t = 0; t < pool.size(); ++t) {
      prefix.push_back(pool[t]);
      values[t] = f_(prefix);
      prefix.pop_back();
    }
    ExtractionNode best;
    bool have = false;
    for (std::size_t x = 0; x < m_.size(); ++x) {
      ExtractionNode node;
      node.limit = x;
      for (std::size_t t = 0; t < pool.size(); ++t)
        if (m_.distance(x, values[t]) <= bound(base + node.seq.size())) node.seq.push_back(pool[t]);
      if (!have || node.seq.size() > best.seq.size()) {
        best = std::move(node);
        have = true;
      }
    }
    return best;
  }

  ExtractionNode step(std::size_t r, Tuple& prefix, const std::vector<std::size_t>& pool, std::size_t base) const {
    // Chain: tau_q is the first element of the current pool; its child
    // extraction runs on the rest, and the child's sequence becomes the pool.
    std::vector<std::size_t> chain;
    std::vector<ExtractionNode> kids;
    std::vector<std::size_t> current = pool;
    while (!current.empty()) {
      const std::size_t j = current.front();
      const std::vector<std::size_t> rest(current.begin() + 1, current.end());
      prefix.push_back(j);
      ExtractionNode child = run(r - 1, prefix, rest, base + chain.size() + 1);
      prefix.pop_back();
      chain.push_back(j);
      current = child.seq;
      kids.push_back(std::move(child));
    }
    const std::size_t len = chain.size();

    // Values reached from each chain element through later chain elements.
    std::vector<std::vector<std::size_t>> reach(len);
    for (std::size_t q = 0; q < len; ++q) {
      const std::vector<std::size_t> later(chain.begin() + static_cast<std::ptrdiff_t>(q) + 1, chain.end());
      std::vector<std::size_t>& vals = reach[q];
      prefix.push_back(chain[q]);
      for_each_increasing_tuple(later, r - 1, [&](const Tuple& tail) {
        Tuple full = prefix;
        full.insert(full.end(), tail.begin(), tail.end());
        vals.push_back(f_(full));
      });
      prefix.pop_back();
      std::sort(vals.begin(), vals.end());
      vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    }

    ExtractionNode best;
    bool have = false;
    for (std::size_t x = 0; x < m_.size(); ++x) {
      ExtractionNode node;
      node.limit = x;
      for (std::size_t q = 0; q < len; ++q) {
        double worst = 0.0;
        // The child's own limit only matters when it has full tuples below it.
        if (kids[q].seq.size() >= r - 1) worst = m_.distance(x, kids[q].limit);
        for (std::size_t v : reach[q]) worst = std::max(worst, m_.distance(x, v));
        if (worst <= bound(base + node.seq.size())) {
          node.seq.push_back(chain[q]);
          node.children.push_back(kids[q]);
        }
      }
      if (!have || node.seq.size() > best.seq.size()) {
        best = std::move(node);
        have = true;
      }
    }
    return best;
  }

  const TupleFunction& f_;
  const MetricPoints& m_;
  double eps_;
};

inline void collect_prefix_limits(const ExtractionNode& node, Tuple& prefix, std::size_t k,
                                  const std::vector<std::size_t>& j_after, std::map<Tuple, std::size_t>& out) {
  if (j_after.size() < k - prefix.size()) return;  // no extension inside J
  out[prefix] = node.limit;
  if (prefix.size() + 1 >= k) return;
  for (std::size_t t = 0; t < j_after.size(); ++t) {
    const std::size_t j = j_after[t];
    const auto it = std::find(node.seq.begin(), node.seq.end(), j);
    if (it == node.seq.end()) throw std::logic_error("extraction tree does not cover J");
    const auto& child = node.children[static_cast<std::size_t>(it - node.seq.begin())];
    prefix.push_back(j);
    collect_prefix_limits(child, prefix, k,
                          std::vector<std::size_t>(j_after.begin() + static_cast<std::ptrdiff_t>(t) + 1,
                                                   j_after.end()),
                          out);
    prefix.pop_back();
  }
}

}  // namespace detail

// J of the requested size on which f has all partial limits, with the
// eps / 2^pos schedule certified by full enumeration. Throws InfeasibleError
// (carrying the largest size found) when the finite domain is too small.
inline ExtractionResult extract_convergent(const TupleFunction& f, const MetricPoints& m, double eps,
                                           std::size_t target_size) {
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
  if (target_size > f.domain()) throw DomainError("target size exceeds the domain");
  for (std::size_t v : f.values())
    if (v >= m.size()) throw DomainError("tuple value refers to a missing point");

  detail::ConvergentExtractor ex(f, m, eps);
  Tuple prefix;
  const detail::ExtractionNode root = ex.run(f.arity(), prefix, iota_indices(f.domain()), 0);
  if (root.seq.size() < target_size) {
    throw InfeasibleError("extraction reached only " + std::to_string(root.seq.size()) + " of " +
                              std::to_string(target_size) + " indices",
                          root.seq.size());
  }
  ExtractionResult out;
  out.arity = f.arity();
  out.epsilon = eps;
  out.J.assign(root.seq.begin(), root.seq.begin() + static_cast<std::ptrdiff_t>(target_size));
  detail::collect_prefix_limits(root, prefix, f.arity(), out.J, out.prefix_limits);
  const auto check = verify_extraction(f, m, out);
  if (!check.ok) throw std::logic_error("extraction certificate failed: " + check.failure);
  out.achieved = check.achieved;
  return out;
}

// ---------------------------------------------------------------------------
// Metrics on {0, ..., n-1} u {inf}

class IndexMetric {
 public:
  // (n+1) x (n+1) table; row/column n is the point at infinity.
  explicit IndexMetric(std::vector<std::vector<double>> table, double tol = 1e-9) {
    const std::size_t s = table.size();
    if (s < 2) throw DomainError("index metric needs at least one finite point and infinity");
    n_ = s - 1;
    d_.resize(s * s);
    for (std::size_t i = 0; i < s; ++i) {
      if (table[i].size() != s) throw DomainError("index metric table must be square");
      for (std::size_t j = 0; j < s; ++j) d_[i * s + j] = table[i][j];
    }
    for (std::size_t i = 0; i < s; ++i) {
      if (std::abs(at(i, i)) > tol) throw DomainError("index metric has a nonzero diagonal");
      for (std::size_t j = 0; j < s; ++j) {
        const double v = at(i, j);
        if (!std::isfinite(v)) throw DomainError("index metric entries must be finite");
        if (i != j && !(v > 0.0)) {
          throw DomainError("distinct indices " + std::to_string(i) + "," + std::to_string(j) +
                            " at distance zero");
        }
        if (std::abs(v - at(j, i)) > tol) throw DomainError("index metric is not symmetric");
      }
    }
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j)
        for (std::size_t l = 0; l < s; ++l)
          if (at(i, l) > at(i, j) + at(j, l) + tol) throw DomainError("index metric violates the triangle inequality");
  }

  // Tabulates delta(a, b) on [n] u {inf}; `b == n` stands for infinity.
  template <class Fn>
  static IndexMetric from_function(std::size_t n, Fn&& delta) {
    std::vector<std::vector<double>> t(n + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t a = 0; a <= n; ++a)
      for (std::size_t b = 0; b <= n; ++b) t[a][b] = a == b ? 0.0 : delta(a, b);
    return IndexMetric(std::move(t));
  }

  // delta(n, m) = scale * |2^-n - 2^-m|, with 2^-inf = 0.
  static IndexMetric dyadic(std::size_t n, double scale = 1.0) {
    return from_function(n, [&](std::size_t a, std::size_t b) {
      const double x = a == n ? 0.0 : std::ldexp(1.0, -static_cast<int>(a));
      const double y = b == n ? 0.0 : std::ldexp(1.0, -static_cast<int>(b));
      return scale * std::abs(x - y);
    });
  }

  // delta(n, m) = |1/(n+1) - 1/(m+1)|, with 1/inf = 0.
  static IndexMetric harmonic(std::size_t n) {
    return from_function(n, [&](std::size_t a, std::size_t b) {
      const double x = a == n ? 0.0 : 1.0 / static_cast<double>(a + 1);
      const double y = b == n ? 0.0 : 1.0 / static_cast<double>(b + 1);
      return std::abs(x - y);
    });
  }

  std::size_t size() const noexcept { return n_; }   // finite points
  std::size_t infinity() const noexcept { return n_; }

  double operator()(std::size_t a, std::size_t b) const {
    if (a > n_ || b > n_) throw DomainError("index outside the metric table");
    return at(a, b);
  }

  // (1/2) inf over m > x of delta(x, m), infinity included.
  double epsilon(std::size_t x) const {
    if (x >= n_) throw DomainError("epsilon is defined on finite indices");
    double best = at(x, n_);
    for (std::size_t m = x + 1; m < n_; ++m) best = std::min(best, at(x, m));
    return 0.5 * best;
  }

  // delta(x', y') <= delta(x, y) whenever x' > x, y' > y, x != y, x' != y'
  // (infinity is the largest index).
  bool is_monotone(double tol = 1e-12) const {
    const std::size_t s = n_ + 1;
    // suffix[a][b] = max delta(x', y') over x' >= a, y' >= b, x' != y'.
    std::vector<double> suffix((s + 1) * (s + 1), -1.0);
    auto sx = [&](std::size_t a, std::size_t b) -> double& { return suffix[a * (s + 1) + b]; };
    for (std::size_t a = s; a-- > 0;) {
      for (std::size_t b = s; b-- > 0;) {
        double v = a != b ? at(a, b) : -1.0;
        v = std::max(v, sx(a + 1, b));
        v = std::max(v, sx(a, b + 1));
        sx(a, b) = v;
      }
    }
    for (std::size_t x = 0; x < s; ++x)
      for (std::size_t y = 0; y < s; ++y)
        if (x != y && sx(x + 1, y + 1) > at(x, y) + tol) return false;
    return true;
  }

 private:
  double at(std::size_t a, std::size_t b) const noexcept { return d_[a * (n_ + 1) + b]; }

  std::size_t n_ = 0;
  std::vector<double> d_;
};

struct MonotoneTransform {
  IndexMetric metric;             // delta*(a, b) = delta(psi(a), psi(b))
  std::vector<std::size_t> psi;   // psi(0) = 0, psi(c+1) = rho(psi(c))
  std::vector<double> eps;        // epsilon(x) of the input metric, x < n
};

// rho(x) = least r > x with sup_{x' >= r} delta(x', inf) < epsilon(x).
// Then x != y, x' >= rho(x), y' >= rho(y) give
//   delta(x', y') <= delta(x', inf) + delta(y', inf) < epsilon(x) + epsilon(y) <= delta(x, y).
// Choosing psi(x) >= rho(x) yields delta* <= delta, and psi(x + 1) >= rho(psi(x))
// yields monotonicity; psi(0) = rho(0), psi(n+1) = max(rho(n+1), rho(psi(n)))
// does both. The chain stops at the first index whose rho leaves the table.
inline MonotoneTransform monotone_transform(const IndexMetric& delta, std::size_t min_length = 2) {
  const std::size_t n = delta.size();
  std::vector<double> eps(n);
  for (std::size_t x = 0; x < n; ++x) eps[x] = delta.epsilon(x);
  // tail[r] = max_{r <= x' < n} delta(x', inf)
  std::vector<double> tail(n + 1, -1.0);
  for (std::size_t r = n; r-- > 0;) tail[r] = std::max(tail[r + 1], delta(r, delta.infinity()));
  auto rho = [&](std::size_t x) -> std::optional<std::size_t> {
    if (x >= n) return std::nullopt;
    for (std::size_t r = x + 1; r < n; ++r)
      if (tail[r] < eps[x]) return r;
    return std::nullopt;
  };

  std::vector<std::size_t> psi;
  std::size_t stuck = 0;
  if (const auto first = rho(0)) {
    psi.push_back(*first);
    while (true) {
      const std::size_t next = psi.size();
      const auto a = rho(next);
      const auto b = rho(psi.back());
      if (!a || !b) {
        stuck = !a ? next : psi.back();
        break;
      }
      psi.push_back(std::max(*a, *b));
    }
  }
  if (psi.size() < min_length) {
    throw InfeasibleError("rho is undefined at index " + std::to_string(stuck) +
                              ": delta(., inf) does not decay below epsilon within the table",
                          psi.size());
  }
  const std::size_t len = psi.size();
  std::vector<std::vector<double>> t(len + 1, std::vector<double>(len + 1, 0.0));
  auto image = [&](std::size_t a) { return a == len ? delta.infinity() : psi[a]; };
  for (std::size_t a = 0; a <= len; ++a)
    for (std::size_t b = 0; b <= len; ++b) t[a][b] = delta(image(a), image(b));
  return {IndexMetric(std::move(t)), std::move(psi), std::move(eps)};
}

inline IndexMetric monotone_metric(const IndexMetric& delta, std::size_t min_length = 2) {
  return monotone_transform(delta, min_length).metric;
}

// ---------------------------------------------------------------------------
// Lipschitz reindexing

struct LipschitzCertificate {
  bool passed = false;
  std::size_t pairs_checked = 0;
  double worst_margin = 0.0;  // max over pairs of d_M - delta_k (<= 0 when passed)
};

struct LipschitzResult {
  std::vector<std::size_t> sigma;       // increasing indices into the domain of f
  LipschitzCertificate certificate;
};

// Exhaustive check that (s) -> f(sigma_*(s)) is 1-Lipschitz from
// ([len]^(k), delta_k) to M, where delta_k is the coordinatewise max.
inline LipschitzCertificate certify_lipschitz(const TupleFunction& f, const MetricPoints& m,
                                              const IndexMetric& delta, const std::vector<std::size_t>& sigma,
                                              double tol = 1e-12) {
  LipschitzCertificate c;
  c.passed = true;
  c.worst_margin = -std::numeric_limits<double>::infinity();
  const std::size_t k = f.arity();
  std::vector<Tuple> tuples;
  std::vector<std::size_t> values;
  for_each_increasing_tuple(iota_indices(sigma.size()), k, [&](const Tuple& s) {
    Tuple image(k);
    for (std::size_t i = 0; i < k; ++i) image[i] = sigma[s[i]];
    tuples.push_back(s);
    values.push_back(f(image));
  });
  for (std::size_t a = 0; a < tuples.size(); ++a) {
    for (std::size_t b = a + 1; b < tuples.size(); ++b) {
      double dk = 0.0;
      for (std::size_t i = 0; i < k; ++i) dk = std::max(dk, delta(tuples[a][i], tuples[b][i]));
      const double margin = m.distance(values[a], values[b]) - dk;
      c.worst_margin = std::max(c.worst_margin, margin);
      ++c.pairs_checked;
      if (margin > tol) c.passed = false;
    }
  }
  if (c.pairs_checked == 0) c.worst_margin = 0.0;
  return c;
}

namespace detail {

// Works on local positions 0..|pool|-1 of `pool`; returns an increasing
// subsequence theta of `pool` such that T -> f(prefix + theta_*(T)) is
// 1-Lipschitz for delta on output positions.
class LipschitzExtractor {
 public:
  LipschitzExtractor(const TupleFunction& f, const MetricPoints& m, const IndexMetric& delta)
      : f_(f), m_(m), delta_(delta) {
    eps_.resize(delta.size());
    for (std::size_t x = 0; x < delta.size(); ++x) eps_[x] = delta.epsilon(x);
  }

  std::vector<std::size_t> run(std::size_t r, Tuple& prefix, const std::vector<std::size_t>& pool) const {
    return r == 1 ? base_case(prefix, pool) : step(r, prefix, pool);
  }

 private:
  // d(f(theta(p)), x) <= eps(p), so distinct outputs are within
  // eps(p) + eps(q) <= delta(p, q).
  std::vector<std::size_t> base_case(Tuple& prefix, const std::vector<std::size_t>& pool) const {
    std::vector<std::size_t> values(pool.size());
    for (std::size_t t = 0; t < pool.size(); ++t) {
      prefix.push_back(pool[t]);
      values[t] = f_(prefix);
      prefix.pop_back();
    }
    std::vector<std::size_t> best;
    for (std::size_t x = 0; x < m_.size(); ++x) {
      std::vector<std::size_t> seq;
      for (std::size_t t = 0; t < pool.size(); ++t)
        if (m_.distance(x, values[t]) <= eps_[seq.size()]) seq.push_back(pool[t]);
      if (seq.size() > best.size()) best = std::move(seq);
    }
    return best;
  }

  // Values of f(prefix + u + theta_*(T)) over all increasing (r-1)-tuples T.
  std::vector<std::size_t> tail_values(Tuple& prefix, std::size_t label, const std::vector<std::size_t>& theta,
                                       std::size_t r, std::size_t from) const {
    std::vector<std::size_t> vals;
    const std::vector<std::size_t> suffix(theta.begin() + static_cast<std::ptrdiff_t>(from), theta.end());
    prefix.push_back(label);
    for_each_increasing_tuple(suffix, r - 1, [&](const Tuple& tail) {
      Tuple full = prefix;
      full.insert(full.end(), tail.begin(), tail.end());
      vals.push_back(f_(full));
    });
    prefix.pop_back();
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return vals;
  }

  // Drops the fewest leading entries of theta so that all remaining values
  // lie strictly within eps(u)/2 of one point g (lowest index on ties).
  std::pair<std::size_t, std::optional<std::size_t>> shift(Tuple& prefix, std::size_t label, std::size_t u,
                                                           const std::vector<std::size_t>& theta,
                                                           std::size_t r) const {
    for (std::size_t s = 0; s <= theta.size(); ++s) {
      const auto vals = tail_values(prefix, label, theta, r, s);
      if (vals.empty()) return {s, std::nullopt};
      for (std::size_t g = 0; g < m_.size(); ++g) {
        bool fits = true;
        for (std::size_t v : vals) {
          if (!(m_.distance(g, v) < 0.5 * eps_[u])) {
            fits = false;
            break;
          }
        }
        if (fits) return {s, g};
      }
    }
    return {theta.size(), std::nullopt};
  }

  std::vector<std::size_t> step(std::size_t r, Tuple& prefix, const std::vector<std::size_t>& pool) const {
    const std::size_t big = pool.size();
    if (big == 0) return {};
    // Positions local to this level.
    auto local_of = [&](std::size_t label) {
      return static_cast<std::size_t>(std::lower_bound(pool.begin(), pool.end(), label) - pool.begin());
    };
    std::vector<std::size_t> tau;                  // local positions
    std::vector<std::optional<std::size_t>> g;     // limit of f(tau(c), theta_*(.))

    // theta for tau(0) = 0: recursion on everything after it.
    std::size_t u = 0;
    std::vector<std::size_t> theta =
        sub(r, prefix, pool[u], std::vector<std::size_t>(pool.begin() + 1, pool.end()));
    for (std::size_t n = 0;; ++n) {
      auto [s, limit] = shift(prefix, pool[u], u, theta, r);
      theta.erase(theta.begin(), theta.begin() + static_cast<std::ptrdiff_t>(s));
      tau.push_back(u);
      g.push_back(limit);
      // tau(n+1) = theta_{tau(n)}(n+2), which keeps later chain elements
      // beyond the first n+1 entries of every earlier theta.
      if (theta.size() < n + 3) break;
      const std::size_t next_label = theta[n + 2];
      const std::vector<std::size_t> rest(theta.begin() + static_cast<std::ptrdiff_t>(n) + 3, theta.end());
      u = local_of(next_label);
      theta = sub(r, prefix, next_label, rest);
    }

    // lambda: keep chain elements whose limits stay within eps(t)/2 of one
    // point x_inf, t the output position; the last element starts no tuple.
    std::vector<std::size_t> best;
    for (std::size_t x = 0; x < m_.size(); ++x) {
      std::vector<std::size_t> picked;
      for (std::size_t c = 0; c < tau.size(); ++c) {
        const bool last = c + 1 == tau.size();
        const std::size_t t = picked.size();
        if (last || !g[c] || m_.distance(*g[c], x) < 0.5 * eps_[t]) picked.push_back(pool[tau[c]]);
      }
      if (picked.size() > best.size()) best = std::move(picked);
    }
    return best;
  }

  // Recursion on m -> f(prefix + label + m) over the given candidates.
  std::vector<std::size_t> sub(std::size_t r, Tuple& prefix, std::size_t label,
                               const std::vector<std::size_t>& candidates) const {
    prefix.push_back(label);
    auto out = run(r - 1, prefix, candidates);
    prefix.pop_back();
    return out;
  }

  const TupleFunction& f_;
  const MetricPoints& m_;
  const IndexMetric& delta_;
  std::vector<double> eps_;
};

// Longest prefix of sigma whose reindexed function passes the exhaustive check.
inline std::size_t longest_certified_prefix(const TupleFunction& f, const MetricPoints& m,
                                            const IndexMetric& delta, const std::vector<std::size_t>& sigma,
                                            double tol = 1e-12) {
  const std::size_t k = f.arity();
  std::vector<Tuple> tuples;
  std::vector<std::size_t> values;
  for (std::size_t len = 1; len <= sigma.size(); ++len) {
    // New tuples end at position len - 1.
    const std::size_t first_new = tuples.size();
    if (len >= k) {
      for_each_increasing_tuple(iota_indices(len - 1), k - 1, [&](const Tuple& head) {
        Tuple s = head;
        s.push_back(len - 1);
        Tuple image(k);
        for (std::size_t i = 0; i < k; ++i) image[i] = sigma[s[i]];
        tuples.push_back(s);
        values.push_back(f(image));
      });
    }
    for (std::size_t a = first_new; a < tuples.size(); ++a) {
      for (std::size_t b = 0; b < a; ++b) {
        double dk = 0.0;
        for (std::size_t i = 0; i < k; ++i) dk = std::max(dk, delta(tuples[a][i], tuples[b][i]));
        if (m.distance(values[a], values[b]) > dk + tol) return len - 1;
      }
    }
  }
  return sigma.size();
}

}  // namespace detail

// sigma of length target_len with f o sigma_* 1-Lipschitz for the monotone
// metric delta (apply monotone_metric first), certified over every pair of
// tuples of the returned domain.
inline LipschitzResult lipschitz_reindex(const TupleFunction& f, const MetricPoints& m, const IndexMetric& delta,
                                         std::size_t target_len) {
  if (!delta.is_monotone()) throw DomainError("delta is not monotone; apply monotone_metric first");
  if (delta.size() < f.domain()) {
    throw DomainError("delta covers " + std::to_string(delta.size()) + " indices, domain has " +
                      std::to_string(f.domain()));
  }
  if (target_len > f.domain()) throw DomainError("target length exceeds the domain");
  for (std::size_t v : f.values())
    if (v >= m.size()) throw DomainError("tuple value refers to a missing point");

  detail::LipschitzExtractor ex(f, m, delta);
  Tuple prefix;
  std::vector<std::size_t> sigma = ex.run(f.arity(), prefix, iota_indices(f.domain()));
  const std::size_t certified = detail::longest_certified_prefix(f, m, delta, sigma);
  if (certified < target_len) {
    throw InfeasibleError("reindexing certified only " + std::to_string(certified) + " of " +
                              std::to_string(target_len) + " indices",
                          certified);
  }
  sigma.resize(target_len);
  LipschitzResult out{std::move(sigma), {}};
  out.certificate = certify_lipschitz(f, m, delta, out.sigma);
  if (!out.certificate.passed) throw std::logic_error("certified prefix failed the exhaustive check");
  return out;
}

// ---------------------------------------------------------------------------
// Intersection extraction in L^1

// Events X_T on a finite probability space, one indicator row per
// increasing k-tuple of [n] in lexicographic order.
struct TupleRows {
  std::size_t arity = 0;
  std::size_t domain = 0;
  std::vector<std::vector<bool>> rows;
};

struct IntersectionResult {
  std::vector<std::size_t> J;
  double achieved_measure = 0.0;  // mu of the intersection over [J]^k
  double guaranteed = 0.0;        // lambda - 2 k eps
  ExtractionResult extraction;
};

inline double measure_of(const std::vector<bool>& row, const std::vector<double>& mu) {
  double s = 0.0;
  for (std::size_t w = 0; w < mu.size(); ++w)
    if (row[w]) s += mu[w];
  return s;
}

// mu of the intersection of the rows indexed by [J]^k (1 when there are none).
inline double intersection_measure(const TupleRows& rows, const std::vector<double>& mu,
                                   const std::vector<std::size_t>& J) {
  const TupleFunction index(rows.arity, rows.domain, iota_indices(rows.rows.size()));
  std::vector<bool> common(mu.size(), true);
  for_each_increasing_tuple(J, rows.arity, [&](const Tuple& t) {
    const auto& row = rows.rows[index.rank(t)];
    for (std::size_t w = 0; w < mu.size(); ++w) common[w] = common[w] && row[w];
  });
  return measure_of(common, mu);
}

// Rows are points of L^1(mu) with distance mu(A symmetric-difference B).
// Limits are rows, so each has measure >= lambda; summing the schedule
// eps / 2^pos over all limit chains gives sum_t C(t, m) 2^-t = 2 per level,
// hence mu(intersection) >= lambda - 2 k eps.
inline IntersectionResult intersect_extract(const TupleRows& rows, const std::vector<double>& mu, double lambda,
                                            double eps, std::size_t target_size) {
  if (!(eps > 0.0)) throw DomainError("epsilon must be positive");
  if (rows.arity == 0) throw DomainError("arity must be positive");
  if (rows.rows.size() != binomial(rows.domain, rows.arity)) throw DomainError("one row per increasing tuple required");
  double total = 0.0;
  for (double w : mu) {
    if (!(w >= 0.0)) throw DomainError("measure weights must be >= 0");
    total += w;
  }
  if (mu.empty() || std::abs(total - 1.0) > 1e-12) throw DomainError("mu must be a probability vector");

  // Distinct rows up to mu-null differences become the points of M.
  std::vector<std::vector<bool>> points;
  std::vector<std::size_t> value_of(rows.rows.size());
  for (std::size_t t = 0; t < rows.rows.size(); ++t) {
    const auto& row = rows.rows[t];
    if (row.size() != mu.size()) throw DomainError("row length differs from the space");
    if (measure_of(row, mu) < lambda - 1e-12) {
      throw DomainError("row " + std::to_string(t) + " has measure below lambda");
    }
    std::size_t found = points.size();
    for (std::size_t p = 0; p < points.size(); ++p) {
      bool same = true;
      for (std::size_t w = 0; w < mu.size() && same; ++w) same = mu[w] <= 0.0 || points[p][w] == row[w];
      if (same) {
        found = p;
        break;
      }
    }
    if (found == points.size()) points.push_back(row);
    value_of[t] = found;
  }
  std::vector<std::vector<double>> d(points.size(), std::vector<double>(points.size(), 0.0));
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = a + 1; b < points.size(); ++b) {
      double s = 0.0;
      for (std::size_t w = 0; w < mu.size(); ++w)
        if (points[a][w] != points[b][w]) s += mu[w];
      d[a][b] = d[b][a] = s;
    }
  const MetricPoints m = MetricPoints::from_matrix(std::move(d));
  const TupleFunction f(rows.arity, rows.domain, std::move(value_of));

  IntersectionResult out;
  out.extraction = extract_convergent(f, m, eps, target_size);
  out.J = out.extraction.J;
  out.achieved_measure = intersection_measure(rows, mu, out.J);
  out.guaranteed = lambda - 2.0 * static_cast<double>(rows.arity) * eps;
  if (out.achieved_measure < out.guaranteed - 1e-12) throw std::logic_error("intersection bound violated");
  return out;
}

}  // namespace randsub
