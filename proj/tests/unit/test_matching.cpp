#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "crossmatch/detail/blossom.hpp"
#include "crossmatch/detail/exact_dense.hpp"
#include "crossmatch/error.hpp"
#include "crossmatch/graphs.hpp"
#include "crossmatch/matching.hpp"
#include "generators.hpp"

using namespace crossmatch;
using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

namespace {

void expect_valid(const Matching& m) {
  for (std::size_t k = 0; k < m.size(); ++k) EXPECT_EQ(m.partner(m.partner(k)), k);
  EXPECT_EQ(m.fixed_point().has_value(), m.size() % 2 == 1);
}

}  // namespace

// Expected values below were obtained by enumerating all admissible
// matchings by hand (3 perfect matchings of 4 points, 3 one-fixed-point
// involutions of 3 points).
TEST(SolveExact, FourPointsOnALine) {
  const auto cloud = support::line_cloud({0.0, 1.0, 2.0, 10.0});
  const auto m = solve_exact(cloud, CostFunction::euclidean());
  EXPECT_EQ(m.pairs(), (Pairs{{0, 1}, {2, 3}}));
  EXPECT_DOUBLE_EQ(m.total_cost(), 9.0);
  EXPECT_EQ(m.solver(), SolverKind::Exact);
}

TEST(SolveExact, TwoPointsGiveTheUniquePair) {
  const auto cloud = support::line_cloud({3.0, -1.5}, 1);
  const auto m = solve_exact(cloud, CostFunction::euclidean(), 99);
  EXPECT_EQ(m.pairs(), (Pairs{{0, 1}}));
  EXPECT_DOUBLE_EQ(m.total_cost(), 4.5);
}

TEST(SolveExact, OddCountLeavesOneFixedPoint) {
  const auto cloud = support::line_cloud({0.0, 1.0, 5.0});
  const auto m = solve_exact(cloud, CostFunction::euclidean());
  EXPECT_EQ(m.pairs(), (Pairs{{0, 1}}));
  ASSERT_TRUE(m.fixed_point().has_value());
  EXPECT_EQ(*m.fixed_point(), 2u);
  EXPECT_DOUBLE_EQ(m.total_cost(), 1.0);
}

TEST(SolveExact, RejectsFewerThanTwoPoints) {
  const auto one = support::line_cloud({1.0});
  EXPECT_THROW(solve_exact(one, CostFunction::euclidean()), UsageError);
  EXPECT_THROW(solve_greedy(one, CostFunction::euclidean()), UsageError);
  EXPECT_THROW(solve_brute_force(one, CostFunction::euclidean()), UsageError);
}

TEST(SolveExact, CoincidentPointsAreHandled) {
  const auto cloud = support::line_cloud({2.0, 2.0, 2.0, 2.0, 2.0});
  const auto m = solve_exact(cloud, CostFunction::euclidean(), 3);
  expect_valid(m);
  EXPECT_EQ(m.total_cost(), 0.0);
}

TEST(SolveExact, SeedIsReproducible) {
  const auto cloud = support::line_cloud({0.0, 1.0, 2.0, 3.0, 4.0, 5.0});  // many tied optima
  const auto a = solve_exact(cloud, CostFunction::euclidean(), 17);
  const auto b = solve_exact(cloud, CostFunction::euclidean(), 17);
  EXPECT_EQ(a.partners(), b.partners());
}

TEST(SolveExact, MatchesBruteForceObjectiveOnRandomClouds) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t t = 2 + trial % 9;  // 2..10, odd and even
    const std::size_t dim = 1 + trial % 3;
    const auto cloud = support::random_cloud(rng(), t / 2, t - t / 2, dim);
    const auto cf = trial % 2 ? CostFunction::power(0.5) : CostFunction::euclidean();
    const auto exact = solve_exact(cloud, cf, rng());
    const auto brute = solve_brute_force(cloud, cf);
    expect_valid(exact);
    EXPECT_EQ(exact.total_cost(), brute.total_cost()) << "trial " << trial << " t=" << t;
  }
}

TEST(SolveExact, SparseCertifiedPathAgreesWithDenseSolver) {
  std::mt19937_64 rng(77);
  for (std::size_t t : {31u, 64u, 101u, 150u}) {
    for (std::size_t dim : {1u, 2u, 5u}) {
      const auto cloud = support::random_cloud(rng(), t / 2, t - t / 2, dim);
      for (const auto& cf : {CostFunction::euclidean(), CostFunction::power(2.0), CostFunction::capped_power(1.0, 0.3)}) {
        const std::uint64_t seed = rng();
        const auto sparse = solve_exact(cloud, cf, seed);
        const auto dense = detail::solve_exact_dense(cloud, cf, seed);
        EXPECT_NEAR(sparse.total_cost(), dense.total_cost(), 1e-9 * std::max(1.0, dense.total_cost()))
            << "t=" << t << " d=" << dim << " " << cf.describe();
      }
    }
  }
}

TEST(SolveExact, ClusteredPointsForceCandidateGrowth) {
  // Two tight clusters of odd size: every optimal matching needs one long
  // edge that no 10-nearest-neighbour candidate set contains.
  std::vector<double> xs;
  for (int i = 0; i < 21; ++i) xs.push_back(0.001 * i);
  for (int i = 0; i < 21; ++i) xs.push_back(100.0 + 0.001 * i);
  const auto cloud = support::line_cloud(xs, 21);
  const auto exact = solve_exact(cloud, CostFunction::euclidean(), 5);
  const auto dense = detail::solve_exact_dense(cloud, CostFunction::euclidean(), 5);
  expect_valid(exact);
  EXPECT_NEAR(exact.total_cost(), dense.total_cost(), 1e-9);
}

TEST(SolveGreedy, SuboptimalExample) {
  const auto cloud = support::line_cloud({0.0, 1.0, 1.9, 3.0});
  const auto greedy = solve_greedy(cloud, CostFunction::euclidean());
  EXPECT_EQ(greedy.pairs(), (Pairs{{0, 3}, {1, 2}}));
  EXPECT_NEAR(greedy.total_cost(), 3.9, 1e-12);
  EXPECT_NEAR(solve_exact(cloud, CostFunction::euclidean()).total_cost(), 2.1, 1e-12);
}

TEST(SolveGreedy, LexicographicTieBreakWithoutSeed) {
  // (0,1) and (1,2) tie at distance 1; input order picks (0,1) first.
  const auto cloud = support::line_cloud({0.0, 1.0, 2.0, 10.0});
  const auto greedy = solve_greedy(cloud, CostFunction::euclidean());
  EXPECT_EQ(greedy.pairs(), (Pairs{{0, 1}, {2, 3}}));
  EXPECT_DOUBLE_EQ(greedy.total_cost(), 9.0);
}

TEST(SolveGreedy, TwoPoints) {
  const auto cloud = support::line_cloud({0.0, 2.0}, 1);
  EXPECT_EQ(solve_greedy(cloud, CostFunction::euclidean(), 1).pairs(), (Pairs{{0, 1}}));
}

TEST(SolveGreedy, ReportsCostUnderCostFunctionButSelectsByDistance) {
  const auto cloud = support::line_cloud({0.0, 1.0, 1.9, 3.0});
  const auto greedy = solve_greedy(cloud, CostFunction::power(2.0));
  EXPECT_EQ(greedy.pairs(), (Pairs{{0, 3}, {1, 2}}));
  EXPECT_NEAR(greedy.total_cost(), 9.0 + 0.81, 1e-12);
}

TEST(SolveGreedy, AlwaysPicksTheClosestRemainingPair) {
  // Reference: the literal O(t^3) loop over all remaining pairs.
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t t = 5 + trial % 30;
    const auto cloud = support::random_cloud(rng(), t / 2, t - t / 2, 2);
    std::vector<char> alive(t, 1);
    double expected = 0.0;
    for (std::size_t round = 0; round < t / 2; ++round) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t bi = 0, bj = 0;
      for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = i + 1; j < t; ++j)
          if (alive[i] && alive[j] && cloud.distance(i, j) < best) {
            best = cloud.distance(i, j);
            bi = i;
            bj = j;
          }
      alive[bi] = alive[bj] = 0;
      expected += best;
    }
    const auto greedy = solve_greedy(cloud, CostFunction::euclidean(), rng());
    expect_valid(greedy);
    EXPECT_NEAR(greedy.total_cost(), expected, 1e-9);
  }
}

TEST(SolveGreedy, NeverBeatsTheExactSolver) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t t = 2 + trial % 40;
    const auto cloud = support::random_cloud(rng(), t / 2, t - t / 2, 1 + trial % 3);
    const auto cf = trial % 3 == 0 ? CostFunction::power(0.5) : CostFunction::euclidean();
    EXPECT_GE(solve_greedy(cloud, cf, rng()).total_cost() + 1e-9, solve_exact(cloud, cf, rng()).total_cost());
  }
}

TEST(SolveBruteForce, EnumerationCounts) {
  std::uint64_t visited = 0;
  (void)solve_brute_force(support::line_cloud({0, 1, 2, 3}), CostFunction::euclidean(), &visited);
  EXPECT_EQ(visited, 3u);
  (void)solve_brute_force(support::line_cloud({0, 1, 2, 3, 4, 5}), CostFunction::euclidean(), &visited);
  EXPECT_EQ(visited, 15u);
  (void)solve_brute_force(support::line_cloud({0, 1, 5}), CostFunction::euclidean(), &visited);
  EXPECT_EQ(visited, 3u);
  EXPECT_EQ(count_matchings(4), 3u);
  EXPECT_EQ(count_matchings(6), 15u);
  EXPECT_EQ(count_matchings(5), 15u);
  EXPECT_EQ(count_matchings(12), 10395u);
}

TEST(SolveBruteForce, AgreesWithExactOnLineExample) {
  const auto cloud = support::line_cloud({0.0, 1.0, 2.0, 10.0});
  EXPECT_EQ(solve_brute_force(cloud, CostFunction::euclidean()).total_cost(),
            solve_exact(cloud, CostFunction::euclidean()).total_cost());
}

TEST(SolveBruteForce, RefusesLargeInstances) {
  const auto cloud = support::random_cloud(1, 7, 6, 2);
  EXPECT_THROW(solve_brute_force(cloud, CostFunction::euclidean()), UsageError);
}

TEST(Matching, ConstructionValidatesInvariants) {
  EXPECT_THROW(Matching::make({1, 2, 0}, 0.0, SolverKind::Exact), std::logic_error);   // 3-cycle
  EXPECT_THROW(Matching::make({0, 1, 3, 2}, 0.0, SolverKind::Exact), std::logic_error);  // two fixed points
  EXPECT_THROW(Matching::make({0, 1}, 0.0, SolverKind::Exact), std::logic_error);  // even t with fixed point
  EXPECT_THROW(Matching::make({1, 0, 3, 2}, -1.0, SolverKind::Exact), std::logic_error);
  EXPECT_NO_THROW(Matching::make({1, 0, 2}, 0.0, SolverKind::Exact));
}

TEST(MatchingToGraph, SymmetricEdges) {
  const auto m = Matching::make({1, 0, 3, 2}, 0.0, SolverKind::Exact);
  const auto g = matching_to_graph(m);
  EXPECT_EQ(g.edges(), (std::vector<SampleGraph::Edge>{{0, 1}, {1, 0}, {2, 3}, {3, 2}}));
  EXPECT_TRUE(g.is_symmetric());
}

TEST(MatchingToGraph, FixedPointIsIsolated) {
  const auto g = matching_to_graph(Matching::make({1, 0, 2}, 0.0, SolverKind::Exact));
  EXPECT_TRUE(g.out(2).empty());
  EXPECT_EQ(g.edge_count(), 2u);
}

TEST(Blossom, MaxWeightWithoutCardinalityConstraint) {
  // Path a-b-c-d with heavy middle edge: max weight takes only (b, c).
  const std::vector<detail::WeightedEdge> edges{{0, 1, 2}, {1, 2, 10}, {2, 3, 2}};
  const auto mate = detail::max_weight_matching(4, edges, false);
  EXPECT_EQ(mate, (std::vector<std::int64_t>{-1, 2, 1, -1}));
  const auto perfect = detail::max_weight_matching(4, edges, true);
  EXPECT_EQ(perfect, (std::vector<std::int64_t>{1, 0, 3, 2}));
}

namespace {

// Maximum matching weight by enumerating every subset of edges.
std::int64_t brute_force_max_weight(std::size_t n, const std::vector<detail::WeightedEdge>& edges) {
  std::int64_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << edges.size()); ++mask) {
    std::vector<char> used(n, 0);
    std::int64_t w = 0;
    bool ok = true;
    for (std::size_t k = 0; k < edges.size() && ok; ++k) {
      if (!(mask >> k & 1u)) continue;
      ok = !used[edges[k].u] && !used[edges[k].v];
      used[edges[k].u] = used[edges[k].v] = 1;
      w += edges[k].weight;
    }
    if (ok) best = std::max(best, w);
  }
  return best;
}

std::int64_t matched_weight(const std::vector<std::int64_t>& mate, const std::vector<detail::WeightedEdge>& edges) {
  std::int64_t w = 0;
  for (const auto& e : edges)
    if (mate[e.u] == static_cast<std::int64_t>(e.v)) w += e.weight;
  return w;
}

}  // namespace

TEST(Blossom, NestedBlossomInstance) {
  // Creates a nested S-blossom, augments through it and expands recursively.
  const std::vector<detail::WeightedEdge> edges{{1, 2, 19}, {1, 3, 20}, {1, 8, 8}, {2, 3, 25}, {2, 4, 18},
                                                {3, 5, 18}, {4, 5, 13}, {4, 7, 7},  {5, 6, 7}};
  const auto mate = detail::max_weight_matching(9, edges, false);
  EXPECT_EQ(matched_weight(mate, edges), brute_force_max_weight(9, edges));
  for (std::size_t v = 0; v < mate.size(); ++v)
    if (mate[v] >= 0) EXPECT_EQ(mate[static_cast<std::size_t>(mate[v])], static_cast<std::int64_t>(v));
}

TEST(Blossom, RandomSmallGraphsMatchEnumeration) {
  std::mt19937_64 rng(31337);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + trial % 9;
    std::vector<detail::WeightedEdge> edges;
    std::uniform_int_distribution<std::int64_t> weight(1, trial % 2 ? 8 : 1000);
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j)
        if (edges.size() < 16 && rng() % 3 != 0) edges.push_back({i, j, weight(rng)});
    const auto mate = detail::max_weight_matching(n, edges, false);
    EXPECT_EQ(matched_weight(mate, edges), brute_force_max_weight(n, edges)) << "trial " << trial;
  }
}
