#include <gtest/gtest.h>

#include "oracles.hpp"
#include "randsub/graph.hpp"

using namespace randsub;

namespace {

DirectedGraph random_graph(std::size_t n, double density, Rng& rng, bool loops = false) {
  std::vector<Edge> edges;
  for (Vertex a = 0; a < n; ++a)
    for (Vertex b = 0; b < n; ++b)
      if ((a != b || loops) && rng.bernoulli(density)) edges.emplace_back(a, b);
  return DirectedGraph(n, std::move(edges));
}

}  // namespace

TEST(DirectedGraph, RejectsDuplicateAndOutOfRangeEdges) {
  EXPECT_THROW(DirectedGraph(2, {{0, 1}, {0, 1}}), DomainError);
  EXPECT_THROW(DirectedGraph(2, {{0, 2}}), DomainError);
  EXPECT_NO_THROW(DirectedGraph(1, {{0, 0}}));
}

TEST(DirectedGraph, EdgesSortedAndAdjacencyConsistent) {
  const DirectedGraph g(3, {{2, 0}, {0, 1}, {1, 1}});
  EXPECT_EQ(g.edges(), (std::vector<Edge>{{0, 1}, {1, 1}, {2, 0}}));
  EXPECT_TRUE(g.has_edge(2, 0));
  EXPECT_FALSE(g.has_edge(0, 2));
  EXPECT_TRUE(g.adjacent(0, 2));
  EXPECT_TRUE(g.has_loop(1));
  EXPECT_EQ(g.in_neighbors(1), (std::vector<Vertex>{0, 1}));
}

TEST(DirectedGraph, StructuralPredicates) {
  EXPECT_TRUE(is_symmetric(complete_graph(4)));
  EXPECT_TRUE(is_antisymmetric(transitive_tournament(4)));
  EXPECT_FALSE(is_antisymmetric(loop_graph()));
  EXPECT_FALSE(is_irreflexive(loop_graph()));
  EXPECT_EQ(symmetric_closure(transitive_tournament(3)), complete_graph(3));
}

TEST(CliqueNumber, CompleteGraphsAndTournaments) {
  for (std::size_t p = 1; p <= 8; ++p) {
    EXPECT_EQ(clique_number(complete_graph(p)), p);
    EXPECT_EQ(clique_number(transitive_tournament(p)), p);
  }
  EXPECT_EQ(clique_number(symmetric_cycle(5)), 2u);
  EXPECT_EQ(clique_number(edgeless_graph(4)), 1u);
  EXPECT_THROW(clique_number(edgeless_graph(0)), DomainError);
}

TEST(CliqueNumber, MatchesSubsetEnumeration) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    const DirectedGraph g = random_graph(n, rng.uniform(), rng);
    ASSERT_EQ(clique_number(g), oracle::clique_number(g)) << "trial " << trial;
    EXPECT_TRUE(is_clique(g, maximum_clique(g)));
  }
}

TEST(MaximalCliques, EveryCliqueIsMaximal) {
  Rng rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(8);
    const DirectedGraph g = random_graph(n, 0.5, rng);
    for (const auto& c : maximal_cliques(g)) {
      ASSERT_TRUE(is_clique(g, c));
      for (Vertex v = 0; v < n; ++v) {
        if (std::find(c.begin(), c.end(), v) != c.end()) continue;
        auto bigger = c;
        bigger.push_back(v);
        EXPECT_FALSE(is_clique(g, bigger));
      }
    }
  }
}

TEST(ChromaticNumber, MatchesColouringEnumeration) {
  EXPECT_EQ(chromatic_number(symmetric_cycle(5)), 3u);
  EXPECT_EQ(chromatic_number(symmetric_cycle(6)), 2u);
  EXPECT_THROW(chromatic_number(loop_graph()), DomainError);
  Rng rng(13);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 1 + rng.below(7);
    const DirectedGraph g = random_graph(n, rng.uniform(), rng);
    ASSERT_EQ(chromatic_number(g), oracle::chromatic_number(g)) << "trial " << trial;
  }
}

TEST(Homomorphism, WitnessesAreValidAndExistenceMatchesEnumeration) {
  Rng rng(14);
  for (int trial = 0; trial < 300; ++trial) {
    const DirectedGraph s = random_graph(1 + rng.below(6), rng.uniform(), rng, true);
    const DirectedGraph t = random_graph(1 + rng.below(4), rng.uniform(), rng, true);
    const auto w = hom_exists(s, t);
    ASSERT_EQ(w.has_value(), oracle::hom_exists(s, t)) << "trial " << trial;
    if (w) {
      EXPECT_TRUE(is_homomorphism(s, t, w->assignment));
    }
  }
}

TEST(Homomorphism, PathsMapIntoTournamentsExactlyWhenShort) {
  // A graph maps into T_p iff it has no path with p edges.
  for (std::size_t len = 1; len <= 6; ++len) {
    const DirectedGraph path = transitive_tournament(len + 1);
    for (std::size_t p = 1; p <= 7; ++p) EXPECT_EQ(hom_exists(path, transitive_tournament(p)).has_value(), len < p);
  }
  EXPECT_FALSE(hom_exists(directed_cycle(3), transitive_tournament(5)).has_value());
  EXPECT_TRUE(hom_exists(directed_cycle(7), loop_graph()).has_value());
}

TEST(Rank, TournamentRanksCountDown) {
  const RankVector r = rank_vector(transitive_tournament(5));
  for (std::size_t v = 0; v < 5; ++v) EXPECT_EQ(r[v], Rank(4 - v));
  EXPECT_EQ(longest_path_length(transitive_tournament(5)), Rank(4));
}

TEST(Rank, CycleMarkerOnVerticesReachingACycle) {
  // 0 -> 1 -> 2 -> 1, 3 isolated
  const DirectedGraph g(4, {{0, 1}, {1, 2}, {2, 1}});
  const RankVector r = rank_vector(g);
  EXPECT_TRUE(r[0].is_cycle());
  EXPECT_TRUE(r[1].is_cycle());
  EXPECT_EQ(r[3], Rank(0));
  EXPECT_TRUE(longest_path_length(g).is_cycle());
  EXPECT_THROW(r[0].value(), DomainError);
}

TEST(Rank, InvariantsAndDepthFirstOracle) {
  Rng rng(15);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(7);
    const DirectedGraph g = random_graph(n, 0.3 * rng.uniform(), rng);
    const RankVector r = rank_vector(g);
    for (Vertex v = 0; v < n; ++v) {
      const auto expected = oracle::rank_of(g, v);
      ASSERT_EQ(r[v].is_cycle(), !expected.has_value());
      if (!expected) continue;
      EXPECT_EQ(r[v].value(), *expected);
      // rank 0 iff sink; otherwise 1 + max over out-neighbours
      if (g.out_neighbors(v).empty()) {
        EXPECT_EQ(r[v].value(), 0u);
      } else {
        std::size_t best = 0;
        for (Vertex w : g.out_neighbors(v)) best = std::max(best, r[w].value());
        EXPECT_EQ(r[v].value(), best + 1);
      }
    }
  }
}
