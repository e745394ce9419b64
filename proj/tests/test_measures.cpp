#include <gtest/gtest.h>

#include "oracles.hpp"
#include "randsub/measures.hpp"

using namespace randsub;

namespace {

SimplexDist random_simplex(std::size_t p, Rng& rng) {
  std::vector<double> w(p);
  for (double& x : w) x = rng.exponential();
  return SimplexDist::normalized(std::move(w));
}

MeasureModel random_mixture(std::size_t window, std::size_t p, Rng& rng) {
  const std::size_t comps = 1 + rng.below(4);
  std::vector<double> weights(comps);
  for (double& w : weights) w = rng.exponential();
  const SimplexDist ws = SimplexDist::normalized(weights);
  std::vector<MixtureComponent> c;
  for (std::size_t t = 0; t < comps; ++t) c.push_back({ws[t], random_simplex(p, rng)});
  return MeasureModel::mixture(window, std::move(c));
}

MeasureModel random_atoms(std::size_t window, std::size_t p, Rng& rng) {
  const std::size_t count = 1 + rng.below(5);
  std::vector<double> w(count);
  for (double& x : w) x = rng.exponential();
  const SimplexDist ws = SimplexDist::normalized(w);
  std::vector<Atom> atoms;
  for (std::size_t t = 0; t < count; ++t) {
    Word word(window);
    for (auto& s : word) s = rng.below(p);
    atoms.push_back({ws[t], word});
  }
  return MeasureModel::atoms(window, p, std::move(atoms));
}

}  // namespace

TEST(MeasureModel, Validation) {
  EXPECT_THROW(MeasureModel::uniform_bernoulli(0, 2), DomainError);
  EXPECT_THROW(MeasureModel::mixture(3, {{0.5, SimplexDist::uniform(2)}}), DomainError);
  EXPECT_THROW(MeasureModel::mixture(3, {{0.5, SimplexDist::uniform(2)}, {0.5, SimplexDist::uniform(3)}}),
               DomainError);
  EXPECT_THROW(MeasureModel::atoms(2, 2, {{1.0, {0, 2}}}), DomainError);
  EXPECT_THROW(MeasureModel::atoms(2, 2, {{1.0, {0}}}), DomainError);
  EXPECT_THROW(EventSpec::order(2, 1), DomainError);
}

TEST(EventProb, MatchesWordEnumerationForAllVariants) {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t p = 2 + rng.below(3);
    const std::size_t n = 2 + rng.below(3);
    const MeasureModel models[] = {MeasureModel::bernoulli(n, random_simplex(p, rng)), random_mixture(n, p, rng),
                                   random_atoms(n, p, rng)};
    for (const auto& m : models) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
          for (const EventSpec& e : {EventSpec::order(i, j), EventSpec::equal(i, j), EventSpec::neq(i, j)}) {
            const double brute = oracle::word_sum_prob(m, [&](const Word& x) { return event_holds(e, x); });
            ASSERT_NEAR(event_prob(m, e), brute, 1e-12);
          }
        }
      }
      const auto cyl = EventSpec::cylinder_of({{0, 1}, {n - 1, 0}});
      EXPECT_NEAR(event_prob(m, cyl), oracle::word_sum_prob(m, [&](const Word& x) { return event_holds(cyl, x); }),
                  1e-12);
    }
  }
}

TEST(EventProb, OrderModelHitsLambdaP) {
  for (std::size_t p = 1; p <= 8; ++p) {
    const auto m = MeasureModel::uniform_bernoulli(4, p);
    EXPECT_NEAR(event_prob(m, EventSpec::order(0, 3)), 0.5 * (1.0 - 1.0 / static_cast<double>(p)), 1e-15);
  }
}

TEST(EqualProb, ExchangeableInequalities) {
  Rng rng(32);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t p = 2 + rng.below(5);
    const MeasureModel m = random_mixture(3, p, rng);
    const double inv = 1.0 / static_cast<double>(p);
    EXPECT_GE(equal_prob(m), inv - 1e-12);
    EXPECT_LE(event_prob(m, EventSpec::order(0, 1)), 0.5 * (1.0 - inv) + 1e-12);
    EXPECT_NEAR(equal_prob(m), event_prob(m, EventSpec::equal(0, 1)), 1e-12);
  }
  EXPECT_THROW(equal_prob(MeasureModel::atoms(2, 2, {{1.0, {0, 1}}})), DomainError);
}

TEST(Marginal, FirstIndexIsMostSignificantAndSumsToOne) {
  const auto m = MeasureModel::atoms(3, 2, {{0.25, {1, 0, 0}}, {0.75, {0, 0, 1}}});
  const MarginalTable t = marginal(m, {0, 2});
  EXPECT_DOUBLE_EQ(t.at({1, 0}), 0.25);
  EXPECT_DOUBLE_EQ(t.at({0, 1}), 0.75);
  EXPECT_DOUBLE_EQ(t.probabilities[2], 0.25);  // code 10 in base 2
  EXPECT_THROW(marginal(m, {2, 0}), DomainError);

  Rng rng(33);
  const MeasureModel b = MeasureModel::bernoulli(4, random_simplex(3, rng));
  const MarginalTable u = marginal(b, {0, 1, 3});
  double total = 0.0;
  for (double x : u.probabilities) total += x;
  EXPECT_NEAR(total, 1.0, 1e-12);
  const auto& lambda = std::get<BernoulliModel>(b.variant()).lambda;
  EXPECT_NEAR(u.at({2, 0, 1}), lambda[2] * lambda[0] * lambda[1], 1e-15);
}

TEST(Exchangeability, MixturesAreAtomsGenerallyAreNot) {
  Rng rng(34);
  EXPECT_NEAR(check_exchangeable(random_mixture(4, 3, rng), 2), 0.0, 1e-15);
  EXPECT_NEAR(check_exchangeable(random_mixture(4, 2, rng), 3), 0.0, 1e-15);
  const auto a = MeasureModel::atoms(3, 2, {{0.5, {0, 1, 1}}, {0.5, {1, 1, 0}}});
  EXPECT_GT(check_exchangeable(a, 1), 0.4);
  // The "shuffle of 0,1" atoms are exchangeable for r = 1 but not 2 over window 2.
  const auto swap = MeasureModel::atoms(2, 2, {{0.5, {0, 1}}, {0.5, {1, 0}}});
  EXPECT_NEAR(check_exchangeable(swap, 1), 0.0, 1e-15);
}

TEST(Sampling, DeterministicAndEmpiricallyCorrect) {
  const auto m = MeasureModel::bernoulli(6, SimplexDist({0.2, 0.3, 0.5}));
  EXPECT_EQ(sample(m, 5), sample(m, 5));
  std::vector<double> counts(3, 0.0);
  const int trials = 20000;
  for (int t = 0; t < trials; ++t) {
    Rng rng(77, static_cast<std::uint64_t>(t));
    for (Symbol s : sample(m, rng)) counts[s] += 1.0;
  }
  const double total = 6.0 * trials;
  EXPECT_NEAR(counts[0] / total, 0.2, 0.01);
  EXPECT_NEAR(counts[2] / total, 0.5, 0.01);
}

TEST(DeepPoint, AveragingBoundAndTieBreaking) {
  const std::vector<double> mu{0.25, 0.25, 0.25, 0.25};
  const std::vector<std::vector<bool>> sets{{true, true, false, false},
                                            {false, true, true, false},
                                            {true, true, false, false}};
  const DeepPoint d = deep_point(sets, mu);
  EXPECT_EQ(d.point, 1u);
  EXPECT_EQ(d.hits, 3u);
  EXPECT_DOUBLE_EQ(d.lambda, 0.5);

  // Null points never count.
  const DeepPoint z = deep_point({{true, false}, {true, true}}, {0.0, 1.0});
  EXPECT_EQ(z.point, 1u);

  Rng rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t omega = 1 + rng.below(8), n = 1 + rng.below(10);
    std::vector<double> w(omega);
    for (double& x : w) x = rng.exponential();
    const auto m = SimplexDist::normalized(w).weights();
    std::vector<std::vector<bool>> s(n, std::vector<bool>(omega));
    for (auto& row : s)
      for (std::size_t i = 0; i < omega; ++i) row[i] = rng.bernoulli(0.6);
    const DeepPoint p = deep_point(s, m);
    EXPECT_GE(static_cast<double>(p.hits), p.lambda * static_cast<double>(n) - 1e-9);
  }
}
