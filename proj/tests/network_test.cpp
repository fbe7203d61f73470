#include <gtest/gtest.h>

#include <random>

#include "doco/network.hpp"

namespace doco {
namespace {

TEST(MaxDegreeWeights, TwoNodes) {
  const auto w = max_degree_weights(Graph::from_one_based(2, {{1, 2}}));
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_DOUBLE_EQ(w(i, j), 0.5);
  EXPECT_DOUBLE_EQ(w.zeta(), 0.5);
}

TEST(MaxDegreeWeights, ThreeNodePath) {
  const auto w = max_degree_weights(Graph::from_one_based(3, {{1, 2}, {2, 3}}));
  EXPECT_DOUBLE_EQ(w(0, 1), 1.0 / 3);
  EXPECT_DOUBLE_EQ(w(1, 2), 1.0 / 3);
  EXPECT_DOUBLE_EQ(w(0, 0), 2.0 / 3);
  EXPECT_DOUBLE_EQ(w(2, 2), 2.0 / 3);
  EXPECT_DOUBLE_EQ(w(1, 1), 1.0 / 3);
  EXPECT_EQ(w(0, 2), 0.0);
}

TEST(MaxDegreeWeights, NoEdgesGivesIdentity) {
  const auto w = max_degree_weights(Graph(6));
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(w(i, j), i == j ? 1.0 : 0.0);
  EXPECT_EQ(w.zeta(), 1.0);
}

TEST(MaxDegreeWeights, RandomGraphsAreSymmetricAndValid) {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution coin(0.35);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + trial % 9;
    std::vector<Graph::Edge> edges;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (coin(rng)) edges.emplace_back(i, j);
    const Graph g(n, edges);
    const auto w = max_degree_weights(g);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) EXPECT_EQ(w(i, j), w(j, i));
    EXPECT_TRUE(validate_assumption4(w, g).ok) << validate_assumption4(w, g).violation;
  }
}

TEST(Graph, RejectsSelfLoopsAndBadEndpoints) {
  EXPECT_THROW(Graph::from_one_based(3, {{2, 2}}), ConfigError);
  EXPECT_THROW(Graph::from_one_based(3, {{1, 4}}), ConfigError);
  EXPECT_THROW(Graph::from_one_based(3, {{0, 1}}), ConfigError);
  EXPECT_EQ(Graph::from_one_based(3, {{1, 2}, {2, 1}}).edge_count(), 1u);
}

TEST(ValidateAssumption4, IdentityAgainstEmptyGraph) {
  EXPECT_TRUE(validate_assumption4(WeightMatrix::identity(4), Graph(4)).ok);
}

TEST(ValidateAssumption4, BadRowSum) {
  std::vector<double> e{0.9, 0.0, 0.0, 1.0};
  const auto report = validate_assumption4(WeightMatrix(2, e), Graph(2));
  EXPECT_FALSE(report.ok);
  EXPECT_NE(report.violation.find("row 1"), std::string::npos);
}

TEST(ValidateAssumption4, WeightOffTheGraph) {
  const auto report = validate_assumption4(WeightMatrix::uniform(3), Graph(3));
  EXPECT_FALSE(report.ok);
  EXPECT_NE(report.violation.find("off the graph"), std::string::npos);
}

TEST(ValidateAssumption4, DimensionMismatch) {
  EXPECT_THROW(validate_assumption4(WeightMatrix::identity(3), Graph(4)), DimensionError);
}

TEST(WindowConnectivity, DefaultScenario) {
  EXPECT_TRUE(verify_window_connectivity(default_ring6_schedule()));
}

TEST(WindowConnectivity, DisconnectedGraphRepeated) {
  const Graph h1 = Graph::from_one_based(6, {{1, 2}, {3, 4}, {5, 6}});
  for (std::size_t b = 1; b <= 4; ++b) {
    EXPECT_FALSE(verify_window_connectivity(TopologySchedule::with_max_degree_weights({h1}, b)));
  }
}

TEST(WindowConnectivity, CompleteGraphWindowOne) {
  EXPECT_TRUE(
      verify_window_connectivity(TopologySchedule::with_max_degree_weights({Graph::complete(5)}, 1)));
}

TEST(WindowConnectivity, MisalignedWindowIsCaught) {
  // Period 3 [H1, H1, H2] with B = 2: the window {H1, H1} is disconnected.
  const auto base = default_ring6_schedule();
  const Graph& h1 = base.graphs()[0];
  const Graph& h2 = base.graphs()[1];
  EXPECT_FALSE(verify_window_connectivity(TopologySchedule::with_max_degree_weights({h1, h1, h2}, 2)));
  EXPECT_TRUE(verify_window_connectivity(TopologySchedule::with_max_degree_weights({h1, h1, h2}, 3)));
}

TEST(ConsensusMix, IdentityKeepsVectors) {
  const std::vector<Vector> v{{1.0, 2.0}, {-3.0, 0.5}, {4.0, 4.0}};
  EXPECT_EQ(consensus_mix(WeightMatrix::identity(3), v), v);
}

TEST(ConsensusMix, UniformGivesAverage) {
  const std::vector<Vector> v{{1.0, 2.0}, {-3.0, 0.5}, {5.0, 0.5}};
  for (const auto& out : consensus_mix(WeightMatrix::uniform(3), v)) {
    EXPECT_NEAR(out[0], 1.0, 1e-15);
    EXPECT_NEAR(out[1], 1.0, 1e-15);
  }
}

TEST(ConsensusMix, PreservesSumUnderDoublyStochasticWeights) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal(0.0, 3.0);
  const auto topo = default_ring6_schedule();
  for (std::size_t t = 1; t <= 40; ++t) {
    std::vector<Vector> v(6, Vector(4));
    for (auto& x : v)
      for (double& c : x) c = normal(rng);
    const auto out = consensus_mix(topo.weights_at(t), v);
    for (std::size_t k = 0; k < 4; ++k) {
      double before = 0.0;
      double after = 0.0;
      for (std::size_t i = 0; i < 6; ++i) {
        before += v[i][k];
        after += out[i][k];
      }
      EXPECT_NEAR(before, after, 1e-10);
    }
  }
}

TEST(ConsensusMix, DimensionMismatch) {
  EXPECT_THROW(consensus_mix(WeightMatrix::identity(2), {{1.0}}), DimensionError);
  EXPECT_THROW(consensus_mix(WeightMatrix::identity(2), {{1.0}, {1.0, 2.0}}), DimensionError);
}

TEST(ProductDeviation, IdentityTwoNodes) {
  const TopologySchedule s({Graph(2)}, {WeightMatrix::identity(2)}, 1);
  EXPECT_DOUBLE_EQ(product_deviation(s, 3, 3), 0.5);
}

TEST(ProductDeviation, UniformMatrixIsExact) {
  const TopologySchedule s({Graph::complete(4)}, {WeightMatrix::uniform(4)}, 1);
  for (std::size_t t = 1; t <= 5; ++t) EXPECT_NEAR(product_deviation(s, t, 1), 0.0, 1e-15);
}

TEST(ProductDeviation, DefaultScenarioMeetsContractionBound) {
  const auto s = default_ring6_schedule();
  EXPECT_DOUBLE_EQ(s.zeta(), 0.5);
  for (std::size_t m = 1; m <= 8; ++m) {
    for (std::size_t t = m; t <= m + 50; ++t) {
      EXPECT_LE(product_deviation(s, t, m), contraction_bound(s, t, m)) << t << " " << m;
    }
  }
  // t - m = 20 explicitly: (1 - (1/2)/144)^(10 - 2).
  EXPECT_LE(product_deviation(s, 21, 1), std::pow(1.0 - 0.5 / 144.0, 8.0));
}

TEST(ProductDeviation, RejectsBadRange) {
  const auto s = default_ring6_schedule();
  EXPECT_THROW(product_deviation(s, 2, 3), ConfigError);
  EXPECT_THROW(product_deviation(s, 2, 0), ConfigError);
}

}  // namespace
}  // namespace doco
