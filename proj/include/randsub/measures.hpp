#pragma once

// Finitely described probability laws on words of a fixed window length:
// product (Bernoulli) measures, finite De Finetti mixtures of them, and
// explicit atoms. Event probabilities and marginals are exact sums.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "randsub/capacity.hpp"
#include "randsub/errors.hpp"
#include "randsub/rng.hpp"

namespace randsub {

using Symbol = std::size_t;
using Word = std::vector<Symbol>;

struct BernoulliModel {
  SimplexDist lambda;  // law of each coordinate; alphabet size = lambda.size()
};

struct MixtureComponent {
  double weight = 0.0;
  SimplexDist lambda;
};

struct MixtureModel {
  std::vector<MixtureComponent> components;
};

struct Atom {
  double probability = 0.0;
  Word word;
};

struct AtomsModel {
  std::vector<Atom> atoms;
};

enum class ModelKind { kBernoulli, kMixture, kAtoms };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::kBernoulli: return "bernoulli";
    case ModelKind::kMixture: return "mixture";
    case ModelKind::kAtoms: return "atoms";
  }
  return "?";
}

// A validated law on alphabet^window.
class MeasureModel {
 public:
  using Variant = std::variant<BernoulliModel, MixtureModel, AtomsModel>;

  static MeasureModel bernoulli(std::size_t window, SimplexDist lambda) {
    if (lambda.size() == 0) throw DomainError("bernoulli model needs a nonempty alphabet");
    const std::size_t p = lambda.size();
    return MeasureModel(window, p, BernoulliModel{std::move(lambda)});
  }

  static MeasureModel uniform_bernoulli(std::size_t window, std::size_t alphabet) {
    return bernoulli(window, SimplexDist::uniform(alphabet));
  }

  static MeasureModel mixture(std::size_t window, std::vector<MixtureComponent> components) {
    if (components.empty()) throw DomainError("mixture model needs at least one component");
    const std::size_t p = components.front().lambda.size();
    double total = 0.0;
    for (const auto& c : components) {
      if (c.lambda.size() != p) throw DomainError("mixture components have different alphabets");
      if (!(c.weight >= 0.0)) throw DomainError("mixture weight must be >= 0");
      total += c.weight;
    }
    if (p == 0) throw DomainError("mixture model needs a nonempty alphabet");
    if (std::abs(total - 1.0) > kSimplexTolerance) throw DomainError("mixture weights do not sum to 1");
    return MeasureModel(window, p, MixtureModel{std::move(components)});
  }

  static MeasureModel atoms(std::size_t window, std::size_t alphabet, std::vector<Atom> atoms) {
    if (atoms.empty()) throw DomainError("atoms model needs at least one atom");
    if (alphabet == 0) throw DomainError("atoms model needs a nonempty alphabet");
    double total = 0.0;
    for (const auto& a : atoms) {
      if (a.word.size() != window) {
        throw DomainError("atom word has length " + std::to_string(a.word.size()) + ", window is " +
                          std::to_string(window));
      }
      for (Symbol s : a.word)
        if (s >= alphabet) throw DomainError("atom symbol " + std::to_string(s) + " outside alphabet");
      if (!(a.probability >= 0.0)) throw DomainError("atom probability must be >= 0");
      total += a.probability;
    }
    if (std::abs(total - 1.0) > kSimplexTolerance) throw DomainError("atom probabilities do not sum to 1");
    return MeasureModel(window, alphabet, AtomsModel{std::move(atoms)});
  }

  std::size_t window() const noexcept { return window_; }
  std::size_t alphabet() const noexcept { return alphabet_; }
  const Variant& variant() const noexcept { return model_; }

  ModelKind kind() const noexcept { return static_cast<ModelKind>(model_.index()); }

  // Bernoulli products and their mixtures are exchangeable by construction.
  bool is_exchangeable() const noexcept { return kind() != ModelKind::kAtoms; }

 private:
  MeasureModel(std::size_t window, std::size_t alphabet, Variant v)
      : window_(window), alphabet_(alphabet), model_(std::move(v)) {
    if (window_ == 0) throw DomainError("window must be positive");
  }

  std::size_t window_;
  std::size_t alphabet_;
  Variant model_;
};

// ---------------------------------------------------------------------------
// Events

enum class EventKind { kOrder, kEqual, kNeq, kCylinder };

struct EventSpec {
  EventKind kind = EventKind::kCylinder;
  std::size_t i = 0;
  std::size_t j = 0;
  std::vector<std::pair<std::size_t, Symbol>> cylinder;  // (index, symbol) constraints

  // {x_i > x_j}, i < j.
  static EventSpec order(std::size_t i, std::size_t j) {
    if (!(i < j)) throw DomainError("order event needs i < j");
    return {EventKind::kOrder, i, j, {}};
  }
  static EventSpec equal(std::size_t i, std::size_t j) { return {EventKind::kEqual, i, j, {}}; }
  static EventSpec neq(std::size_t i, std::size_t j) { return {EventKind::kNeq, i, j, {}}; }
  static EventSpec cylinder_of(std::vector<std::pair<std::size_t, Symbol>> constraints) {
    return {EventKind::kCylinder, 0, 0, std::move(constraints)};
  }
};

inline bool event_holds(const EventSpec& e, const Word& x) {
  switch (e.kind) {
    case EventKind::kOrder: return x.at(e.i) > x.at(e.j);
    case EventKind::kEqual: return x.at(e.i) == x.at(e.j);
    case EventKind::kNeq: return x.at(e.i) != x.at(e.j);
    case EventKind::kCylinder:
      for (const auto& [index, symbol] : e.cylinder)
        if (x.at(index) != symbol) return false;
      return true;
  }
  return false;
}

namespace detail {

inline void check_event(const MeasureModel& m, const EventSpec& e) {
  auto check_index = [&](std::size_t index) {
    if (index >= m.window()) {
      throw DomainError("event index " + std::to_string(index) + " outside window " +
                        std::to_string(m.window()));
    }
  };
  if (e.kind == EventKind::kCylinder) {
    for (const auto& [index, symbol] : e.cylinder) {
      check_index(index);
      if (symbol >= m.alphabet()) throw DomainError("cylinder symbol outside alphabet");
    }
  } else {
    check_index(e.i);
    check_index(e.j);
    if (e.kind == EventKind::kOrder && !(e.i < e.j)) throw DomainError("order event needs i < j");
  }
}

inline double product_event_prob(const std::vector<double>& lambda, const EventSpec& e) {
  const std::size_t p = lambda.size();
  switch (e.kind) {
    case EventKind::kOrder: {
      double s = 0.0;
      for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = 0; b < a; ++b) s += lambda[a] * lambda[b];
      return s;
    }
    case EventKind::kEqual:
    case EventKind::kNeq: {
      double eq = 1.0;
      if (e.i != e.j) {
        eq = 0.0;
        for (double x : lambda) eq += x * x;
      }
      return e.kind == EventKind::kEqual ? eq : 1.0 - eq;
    }
    case EventKind::kCylinder: {
      // Repeated indices must agree; distinct indices are independent.
      std::vector<std::pair<std::size_t, Symbol>> c = e.cylinder;
      std::sort(c.begin(), c.end());
      double prob = 1.0;
      for (std::size_t t = 0; t < c.size(); ++t) {
        if (t > 0 && c[t].first == c[t - 1].first) {
          if (c[t].second != c[t - 1].second) return 0.0;
          continue;
        }
        prob *= lambda[c[t].second];
      }
      return prob;
    }
  }
  return 0.0;
}

}  // namespace detail

inline double event_prob(const MeasureModel& m, const EventSpec& e) {
  detail::check_event(m, e);
  return std::visit(
      [&](const auto& model) -> double {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, BernoulliModel>) {
          return detail::product_event_prob(model.lambda.weights(), e);
        } else if constexpr (std::is_same_v<T, MixtureModel>) {
          double s = 0.0;
          for (const auto& c : model.components) s += c.weight * detail::product_event_prob(c.lambda.weights(), e);
          return s;
        } else {
          double s = 0.0;
          for (const auto& a : model.atoms)
            if (event_holds(e, a.word)) s += a.probability;
          return s;
        }
      },
      m.variant());
}

// m({x_0 = x_1}) for exchangeable models: sum_k w_k sum_a (lambda_a^(k))^2.
inline double equal_prob(const MeasureModel& m) {
  if (!m.is_exchangeable()) {
    throw DomainError("equal_prob needs a bernoulli or mixture model; use event_prob(EQUAL(0,1)) for atoms");
  }
  auto sum_squares = [](const SimplexDist& l) {
    double s = 0.0;
    for (double x : l.weights()) s += x * x;
    return s;
  };
  if (const auto* b = std::get_if<BernoulliModel>(&m.variant())) return sum_squares(b->lambda);
  double s = 0.0;
  for (const auto& c : std::get<MixtureModel>(m.variant()).components) s += c.weight * sum_squares(c.lambda);
  return s;
}

// ---------------------------------------------------------------------------
// Marginals

// Joint law of (x_{indices[0]}, ..., x_{indices[r-1]}); cell index is the
// base-p number a_0 a_1 ... a_{r-1} with a_0 most significant.
struct MarginalTable {
  std::size_t alphabet = 0;
  std::vector<std::size_t> indices;
  std::vector<double> probabilities;

  double at(const Word& cell) const {
    std::size_t code = 0;
    for (Symbol a : cell) code = code * alphabet + a;
    return probabilities.at(code);
  }
};

namespace detail {

inline std::size_t checked_power(std::size_t base, std::size_t exp) {
  std::size_t out = 1;
  for (std::size_t t = 0; t < exp; ++t) {
    if (out > (std::size_t{1} << 26) / std::max<std::size_t>(base, 1)) {
      throw DomainError("marginal table too large");
    }
    out *= base;
  }
  return out;
}

// Joint law at an arbitrary tuple of distinct indices (any order).
inline std::vector<double> tuple_table(const MeasureModel& m, const std::vector<std::size_t>& idx) {
  const std::size_t p = m.alphabet();
  const std::size_t r = idx.size();
  const std::size_t cells = checked_power(p, r);
  std::vector<double> table(cells, 0.0);
  auto product_table = [&](const std::vector<double>& lambda, double weight) {
    for (std::size_t code = 0; code < cells; ++code) {
      double prob = weight;
      std::size_t rest = code;
      for (std::size_t t = 0; t < r; ++t) {
        prob *= lambda[rest % p];
        rest /= p;
      }
      table[code] += prob;
    }
  };
  std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, BernoulliModel>) {
          product_table(model.lambda.weights(), 1.0);
        } else if constexpr (std::is_same_v<T, MixtureModel>) {
          for (const auto& c : model.components) product_table(c.lambda.weights(), c.weight);
        } else {
          for (const auto& a : model.atoms) {
            std::size_t code = 0;
            for (std::size_t t = 0; t < r; ++t) code = code * p + a.word[idx[t]];
            table[code] += a.probability;
          }
        }
      },
      m.variant());
  if (!std::holds_alternative<AtomsModel>(m.variant())) {
    // product_table enumerates codes least-significant-first; reorder so the
    // first index is the most significant digit, as for atoms.
    std::vector<double> reordered(cells);
    for (std::size_t code = 0; code < cells; ++code) {
      std::size_t rest = code, rev = 0;
      for (std::size_t t = 0; t < r; ++t) {
        rev = rev * p + rest % p;
        rest /= p;
      }
      reordered[rev] = table[code];
    }
    table = std::move(reordered);
  }
  return table;
}

}  // namespace detail

inline MarginalTable marginal(const MeasureModel& m, const std::vector<std::size_t>& indices) {
  for (std::size_t t = 0; t < indices.size(); ++t) {
    if (indices[t] >= m.window()) throw DomainError("marginal index outside window");
    if (t > 0 && !(indices[t - 1] < indices[t])) throw DomainError("marginal indices must be strictly increasing");
  }
  return {m.alphabet(), indices, detail::tuple_table(m, indices)};
}

// ---------------------------------------------------------------------------
// Sampling

inline Symbol sample_symbol(const SimplexDist& lambda, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t a = 0; a < lambda.size(); ++a) {
    if (lambda[a] <= 0.0) continue;
    last_positive = a;
    acc += lambda[a];
    if (u < acc) return a;
  }
  return last_positive;  // rounding slack at the top of the CDF
}

inline Word sample(const MeasureModel& m, Rng& rng) {
  return std::visit(
      [&](const auto& model) -> Word {
        using T = std::decay_t<decltype(model)>;
        if constexpr (std::is_same_v<T, BernoulliModel>) {
          Word w(m.window());
          for (auto& s : w) s = sample_symbol(model.lambda, rng);
          return w;
        } else if constexpr (std::is_same_v<T, MixtureModel>) {
          std::vector<double> weights;
          for (const auto& c : model.components) weights.push_back(c.weight);
          const auto& comp = model.components[sample_symbol(SimplexDist::normalized(weights), rng)];
          Word w(m.window());
          for (auto& s : w) s = sample_symbol(comp.lambda, rng);
          return w;
        } else {
          std::vector<double> weights;
          for (const auto& a : model.atoms) weights.push_back(a.probability);
          return model.atoms[sample_symbol(SimplexDist::normalized(weights), rng)].word;
        }
      },
      m.variant());
}

inline Word sample(const MeasureModel& m, std::uint64_t seed) {
  Rng rng(seed);
  return sample(m, rng);
}

// ---------------------------------------------------------------------------
// Exchangeability

// Largest cell-wise spread of the r-dimensional marginal across all
// injections [r] -> [window]. Zero exactly for exchangeable models.
inline double check_exchangeable(const MeasureModel& m, std::size_t r) {
  if (r > m.window()) throw DomainError("r exceeds the window");
  if (r == 0) return 0.0;
  std::vector<double> lo, hi;
  std::vector<std::size_t> idx(r);
  std::vector<char> used(m.window(), 0);
  auto visit = [&](auto&& self, std::size_t depth) -> void {
    if (depth == r) {
      const auto table = detail::tuple_table(m, idx);
      if (lo.empty()) {
        lo = hi = table;
      } else {
        for (std::size_t c = 0; c < table.size(); ++c) {
          lo[c] = std::min(lo[c], table[c]);
          hi[c] = std::max(hi[c], table[c]);
        }
      }
      return;
    }
    for (std::size_t v = 0; v < m.window(); ++v) {
      if (used[v]) continue;
      used[v] = 1;
      idx[depth] = v;
      self(self, depth + 1);
      used[v] = 0;
    }
  };
  visit(visit, 0);
  double worst = 0.0;
  for (std::size_t c = 0; c < lo.size(); ++c) worst = std::max(worst, hi[c] - lo[c]);
  return worst;
}

// ---------------------------------------------------------------------------
// Averaging: a point lying in many of N sets of measure >= lambda.

struct DeepPoint {
  std::size_t point = 0;
  std::size_t hits = 0;
  double lambda = 0.0;  // smallest set measure
};

inline DeepPoint deep_point(const std::vector<std::vector<bool>>& sets, const std::vector<double>& mu) {
  if (sets.empty()) throw DomainError("deep_point needs at least one set");
  const std::size_t omega = mu.size();
  if (omega == 0) throw DomainError("deep_point needs a nonempty space");
  double total = 0.0;
  for (double w : mu) {
    if (!(w >= 0.0)) throw DomainError("measure weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) throw DomainError("measure must sum to 1");

  std::vector<std::size_t> hits(omega, 0);
  double lambda = 1.0;
  for (const auto& s : sets) {
    if (s.size() != omega) throw DomainError("indicator vector size differs from the space");
    double measure = 0.0;
    for (std::size_t w = 0; w < omega; ++w) {
      if (!s[w]) continue;
      ++hits[w];
      measure += mu[w];
    }
    lambda = std::min(lambda, measure);
  }
  DeepPoint best{0, 0, lambda};
  bool found = false;
  for (std::size_t w = 0; w < omega; ++w) {
    if (mu[w] <= 0.0) continue;
    if (!found || hits[w] > best.hits) {
      best.point = w;
      best.hits = hits[w];
      found = true;
    }
  }
  // sum_w mu(w) hits(w) = sum_i mu(X_i) >= lambda N, so the maximum hit count
  // over the support is at least ceil(lambda N).
  const double n = static_cast<double>(sets.size());
  const auto required = static_cast<std::size_t>(std::ceil(lambda * n - 1e-9));
  if (best.hits < required) throw std::logic_error("deep_point: averaging bound violated");
  return best;
}

}  // namespace randsub
