#include <gtest/gtest.h>

#include "oracles.hpp"
#include "randsub/thresholds.hpp"

using namespace randsub;

TEST(Subgraphs, OrderSubgraphHasNoPathOfLengthP) {
  Rng rng(41);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t p = 1 + rng.below(4);
    Word x(10);
    for (auto& s : x) s = rng.below(p);
    const SubgraphSample s = order_subgraph(x);
    EXPECT_LT(s.longest_path(), p);
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t j = i + 1; j < 10; ++j) EXPECT_EQ(s.has_edge(i, j), x[i] > x[j]);
  }
}

TEST(Subgraphs, NeqSubgraphHasNoLargeClique) {
  Rng rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t p = 1 + rng.below(4);
    Word x(9);
    for (auto& s : x) s = rng.below(p);
    const SubgraphSample s = neq_subgraph(x);
    EXPECT_LE(s.clique_number(), p);
    EXPECT_EQ(s.clique_number(), oracle::clique_number(s.to_graph()));
  }
}

TEST(Subgraphs, SampleEdgesRequireIncreasingPairs) {
  SubgraphSample s(4);
  EXPECT_THROW(s.set_edge(2, 1), DomainError);
  EXPECT_THROW(s.set_edge(1, 4), DomainError);
  s.set_edge(0, 3);
  EXPECT_EQ(s.edge_count(), 1u);
}

TEST(Bounds, LambdaPAndClampedBound) {
  EXPECT_DOUBLE_EQ(lambda_p(1), 0.0);
  EXPECT_DOUBLE_EQ(lambda_p(3), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(finpath_lower_bound(0.6, 2), (0.6 - 0.25) / 0.75);
  EXPECT_DOUBLE_EQ(finpath_lower_bound(0.1, 2), 0.0);
  EXPECT_DOUBLE_EQ(finpath_lower_bound(1.0, 5), 1.0);
}

TEST(Simulation, CertainEdgesAlwaysGiveLongPaths) {
  const ThresholdReport r = estimate_path_probability(IndependentEdges{1.0}, 3, 8, 10, kDefaultSeed);
  EXPECT_EQ(r.mu_path, 1.0);
  EXPECT_EQ(r.min_edge_prob, 1.0);
  EXPECT_TRUE(verify_finpath_bound(r, 0.0));
}

TEST(Simulation, OrderModelNeverReachesP) {
  const auto m = MeasureModel::uniform_bernoulli(12, 3);
  const ThresholdReport r = estimate_path_probability(m, 3, 12, 2000, 5);
  EXPECT_EQ(r.mu_path, 0.0);
  EXPECT_NEAR(*r.exact_min_edge_prob, 1.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(*r.exact_bound, 0.0);
  for (double f : r.edge_frequency) EXPECT_NEAR(f, 1.0 / 3.0, 0.06);
}

TEST(Simulation, ConditionalBoundHolds) {
  const ThresholdReport r = estimate_path_probability(IndependentEdges{0.6}, 2, 8, 5000, 9);
  EXPECT_TRUE(verify_finpath_bound(r, 4.0));
  EXPECT_GE(r.mu_path, *r.exact_bound);
}

TEST(Simulation, DeterministicAndValidated) {
  const auto a = estimate_path_probability(IndependentEdges{0.4}, 2, 6, 300, 1);
  const auto b = estimate_path_probability(IndependentEdges{0.4}, 2, 6, 300, 1);
  EXPECT_EQ(a.longest_paths, b.longest_paths);
  EXPECT_THROW(estimate_path_probability(IndependentEdges{0.4}, 5, 5, 10, 1), DomainError);
  EXPECT_THROW(estimate_path_probability(IndependentEdges{1.4}, 2, 5, 10, 1), DomainError);
  EXPECT_THROW(estimate_path_probability(IndependentEdges{0.4}, 2, 5, 0, 1), DomainError);
  EXPECT_THROW(estimate_path_probability(MeasureModel::uniform_bernoulli(4, 2), 2, 6, 10, 1), DomainError);
}

TEST(Simulation, ChromaticFractionExtremes) {
  EXPECT_EQ(chromatic_fraction(0.0, 2, 6, 20, 1), 0.0);
  EXPECT_EQ(chromatic_fraction(1.0, 6, 6, 20, 1), 1.0);
}

TEST(BinaryTree, ShapeAndDepthColouring) {
  const DirectedGraph t = binary_tree(3);
  EXPECT_EQ(t.vertex_count(), 15u);
  EXPECT_EQ(t.edge_count(), 14u);
  EXPECT_EQ(tree_depth_of(0), 0u);
  EXPECT_EQ(tree_depth_of(6), 2u);
  EXPECT_EQ(tree_depth_of(7), 3u);
  const auto colors = depth_coloring(t);
  for (std::size_t e = 0; e < t.edge_count(); ++e) EXPECT_EQ(colors[e], tree_depth_of(t.edges()[e].first));
}

TEST(DyadicZones, PartitionTheColours) {
  const auto z = dyadic_zones(4, 16);
  EXPECT_EQ(z[0], (std::vector<std::size_t>{0, 2, 4, 6, 8, 10, 12, 14}));
  EXPECT_EQ(z[1], (std::vector<std::size_t>{1, 5, 9, 13}));
  EXPECT_EQ(z[3], (std::vector<std::size_t>{7}));
}

TEST(Finb, EdgeProbabilitiesAreExactAndAboveOneMinusEpsilon) {
  const FinbModel m = FinbModel::on_binary_tree(6, 0.25);
  EXPECT_EQ(m.atoms().size(), 8u);
  for (std::size_t e = 0; e < m.host().edge_count(); ++e) {
    double present = 0.0;
    for (std::size_t a = 0; a < m.atoms().size(); ++a)
      if (m.sample(a).has_edge(m.host().edges()[e].first, m.host().edges()[e].second)) present += m.atoms()[a];
    EXPECT_NEAR(m.edge_probability(e), present, 1e-15);
    EXPECT_GE(m.edge_probability(e), 1.0 - m.epsilon());
  }
}

TEST(Finb, ZonesCoveringEveryDepthBlockAllRootToLeafPaths) {
  // Depth 4 with eps = 0.5 needs 4 atoms; singleton zones cut level n.
  const FinbModel m = FinbModel::on_binary_tree(4, 0.5, singleton_zones(4));
  for (std::size_t a = 0; a < 4; ++a) EXPECT_FALSE(has_root_to_leaf_path(m.host(), m.sample(a)));
  EXPECT_TRUE(has_root_to_leaf_path(m.host(), m.host()));
}

TEST(Finb, Validation) {
  const auto tree = binary_tree(2);
  const auto colors = depth_coloring(tree);
  EXPECT_THROW(FinbModel(tree, colors, {{0}, {0}}, SimplexDist::uniform(2), 0.6), DomainError);
  EXPECT_THROW(FinbModel(tree, colors, {{0}, {1}}, SimplexDist::uniform(2), 0.5), DomainError);
  EXPECT_THROW(FinbModel::on_binary_tree(3, 1.5), DomainError);
}

TEST(Reals, PathsAreShortAndEdgeProbabilityIsExact) {
  std::vector<double> grid(30);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<double>(i) / 30.0;
  const RealsModel m(0.2, grid);
  EXPECT_DOUBLE_EQ(m.edge_probability(), 0.32);
  double edges = 0.0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    Rng rng(43, static_cast<std::uint64_t>(t));
    const SubgraphSample s = m.subgraph(m.draw(rng));
    EXPECT_LE(s.longest_path(), m.max_chain_edges());
    EXPECT_LT(static_cast<double>(s.longest_path()) * m.epsilon(), 1.0);
    edges += s.has_edge(3, 17) ? 1.0 : 0.0;
  }
  EXPECT_NEAR(edges / trials, 0.32, 0.05);
}
