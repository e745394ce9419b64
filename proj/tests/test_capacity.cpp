#include <gtest/gtest.h>

#include "oracles.hpp"
#include "randsub/capacity.hpp"

using namespace randsub;

namespace {

DirectedGraph random_symmetric(std::size_t n, double density, Rng& rng) {
  std::vector<Edge> edges;
  for (Vertex a = 0; a < n; ++a)
    for (Vertex b = a + 1; b < n; ++b)
      if (rng.bernoulli(density)) {
        edges.emplace_back(a, b);
        edges.emplace_back(b, a);
      }
  return DirectedGraph(n, std::move(edges));
}

}  // namespace

TEST(SimplexDist, Validation) {
  EXPECT_THROW(SimplexDist({0.5, 0.6}), DomainError);
  EXPECT_THROW(SimplexDist({1.5, -0.5}), DomainError);
  EXPECT_NO_THROW(SimplexDist({0.25, 0.75}));
  EXPECT_DOUBLE_EQ(SimplexDist::uniform_on(4, {1, 3})[3], 0.5);
  EXPECT_THROW(SimplexDist::normalized({0.0, 0.0}), DomainError);
}

TEST(EdgeForm, CountsLoopsOnceAndDirectedEdgesOnce) {
  EXPECT_DOUBLE_EQ(edge_quadratic_form(loop_graph(), SimplexDist::uniform(1)), 1.0);
  EXPECT_DOUBLE_EQ(edge_quadratic_form(transitive_tournament(2), SimplexDist::uniform(2)), 0.25);
  EXPECT_DOUBLE_EQ(edge_quadratic_form(complete_graph(2), SimplexDist::uniform(2)), 0.5);
}

TEST(ClosedForm, KnownFamilies) {
  for (std::size_t p = 1; p <= 8; ++p) {
    const double cp = 1.0 - 1.0 / static_cast<double>(p);
    EXPECT_NEAR(*capacity_closed_form(complete_graph(p)), cp, 1e-15);
    EXPECT_NEAR(*capacity_closed_form(transitive_tournament(p)), 0.5 * cp, 1e-15);
  }
  EXPECT_DOUBLE_EQ(*capacity_closed_form(loop_graph()), 1.0);
  // Neither symmetric nor antisymmetric and loop-free: no closed form.
  EXPECT_FALSE(capacity_closed_form(DirectedGraph(3, {{0, 1}, {1, 0}, {1, 2}})).has_value());
}

TEST(Numeric, MatchesClosedFormsOnCompleteAndTournament) {
  for (std::size_t p = 2; p <= 8; ++p) {
    const double cp = 1.0 - 1.0 / static_cast<double>(p);
    EXPECT_NEAR(capacity_numeric(complete_graph(p)).value, cp, 1e-7);
    EXPECT_NEAR(capacity_numeric(transitive_tournament(p)).value, 0.5 * cp, 1e-7);
  }
}

TEST(Numeric, MaximizerAttainsReportedValue) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const DirectedGraph g = random_symmetric(2 + rng.below(7), 0.5, rng);
    const CapacityResult r = capacity_numeric(g);
    EXPECT_NEAR(edge_quadratic_form(g, r.maximizer), r.value, 1e-12);
  }
}

TEST(Numeric, MotzkinStrausOnRandomSymmetricGraphs) {
  Rng rng(22);
  for (int trial = 0; trial < 80; ++trial) {
    const std::size_t n = 1 + rng.below(9);
    const DirectedGraph g = random_symmetric(n, rng.uniform(), rng);
    const double expected = 1.0 - 1.0 / static_cast<double>(oracle::clique_number(g));
    ASSERT_NEAR(capacity_numeric(g).value, expected, 1e-6) << "trial " << trial;
  }
}

TEST(Numeric, NeverBelowLatticeOracle) {
  // Mixed digraphs on 3 vertices: the lattice of resolution 30 is a lower
  // bound; the optimizer must reach it.
  for (const auto& g : oracle::all_digraphs(3, false)) {
    const double lattice = oracle::capacity_lattice(g, 30);
    ASSERT_GE(capacity_numeric(g).value, lattice - 1e-12);
  }
}

TEST(Numeric, DeterministicForFixedSeed) {
  const DirectedGraph g(4, {{0, 1}, {1, 2}, {2, 0}, {0, 3}, {3, 0}});
  OptimizerConfig cfg;
  cfg.seed = 99;
  const auto a = capacity_numeric(g, cfg), b = capacity_numeric(g, cfg);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.maximizer.weights(), b.maximizer.weights());
}

TEST(Numeric, LoopsGiveCapacityOne) {
  const DirectedGraph g(3, {{0, 1}, {2, 2}});
  EXPECT_NEAR(capacity_numeric(g).value, 1.0, 1e-12);
}

TEST(Numeric, EdgelessGraphHasCapacityZero) {
  EXPECT_EQ(capacity_numeric(edgeless_graph(3)).value, 0.0);
}

TEST(SupportEnum, AgreesWithClosedFormsAndRespectsSizeLimit) {
  EXPECT_NEAR(capacity_support_enum(complete_graph(4)).value, 0.75, 1e-12);
  EXPECT_NEAR(capacity_support_enum(transitive_tournament(3)).value, 1.0 / 3.0, 1e-3);
  EXPECT_THROW(capacity_support_enum(complete_graph(kSupportEnumVertexLimit + 1)), DomainError);
}

TEST(Auto, PrefersClosedForm) {
  EXPECT_EQ(capacity_auto(complete_graph(3)).method, CapacityMethod::kClosedForm);
  EXPECT_EQ(capacity_auto(DirectedGraph(3, {{0, 1}, {1, 0}, {1, 2}})).method, CapacityMethod::kNumeric);
  EXPECT_NEAR(relative_capacity_nn(complete_graph(3)), 2.0 / 3.0, 1e-12);
}

TEST(Kkt, ResidualVanishesAtUniformCliqueAndNotElsewhere) {
  const DirectedGraph g = symmetric_cycle(5);
  EXPECT_NEAR(kkt_residual(g, SimplexDist::uniform_on(5, {0, 1})), 0.0, 1e-12);
  // Uniform on C5 (value 10/25 < 1/2) is stationary but not maximal.
  EXPECT_NEAR(kkt_residual(g, SimplexDist::uniform(5)), 0.0, 1e-12);
  EXPECT_GT(kkt_residual(g, SimplexDist({0.7, 0.1, 0.1, 0.05, 0.05})), 1e-3);
  EXPECT_THROW(kkt_residual(transitive_tournament(3), SimplexDist::uniform(3)), DomainError);
}

TEST(Numeric, MonotoneUnderHomomorphisms) {
  // A homomorphism G -> F pushes any distribution on V(G) forward onto V(F) without
  // losing edge mass, so c0(G) <= c0(F). Sources on <= 3 vertices, targets on <= 4.
  std::vector<DirectedGraph> sources, targets;
  for (std::size_t n = 1; n <= 3; ++n)
    for (auto& g : oracle::all_digraphs(n, n <= 2)) sources.push_back(std::move(g));
  for (std::size_t n = 1; n <= 4; ++n)
    for (auto& g : oracle::all_digraphs(n, n <= 2)) targets.push_back(std::move(g));
  std::vector<double> cs, ct;
  for (const auto& g : sources) cs.push_back(capacity_numeric(g).value);
  for (const auto& g : targets) ct.push_back(capacity_numeric(g).value);
  std::size_t homs = 0;
  for (std::size_t s = 0; s < sources.size(); ++s)
    for (std::size_t t = 0; t < targets.size(); ++t)
      if (hom_exists(sources[s], targets[t])) {
        ++homs;
        ASSERT_LE(cs[s], ct[t] + 1e-9) << "source " << s << ", target " << t;
      }
  EXPECT_GT(homs, 0u);
}
