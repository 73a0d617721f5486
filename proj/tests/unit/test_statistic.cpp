#include <gtest/gtest.h>

#include <algorithm>

#include "crossmatch/error.hpp"
#include "crossmatch/graphs.hpp"
#include "crossmatch/matching.hpp"
#include "crossmatch/statistic.hpp"
#include "generators.hpp"

using namespace crossmatch;
using Edges = std::vector<SampleGraph::Edge>;

namespace {

SampleGraph matching_graph(std::size_t t, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  Edges e;
  for (auto [i, j] : pairs) {
    e.emplace_back(i, j);
    e.emplace_back(j, i);
  }
  return SampleGraph(t, e, {GraphKind::Matching, 0});
}

}  // namespace

TEST(CrossCount, AllPairsCross) {
  const auto cloud = support::line_cloud({0.0, 1.0, 2.0, 3.0}, 2);
  const auto c = cross_count(matching_graph(4, {{0, 2}, {1, 3}}), cloud);
  EXPECT_EQ(c.chi, 4u);
  ASSERT_TRUE(c.cross_pairs.has_value());
  EXPECT_EQ(*c.cross_pairs, 2u);
  EXPECT_EQ(c.t, 4u);
  EXPECT_EQ(c.m, 2u);
  EXPECT_EQ(c.n, 2u);
}

TEST(CrossCount, WithinSamplePairs) {
  const auto cloud = support::line_cloud({0.0, 1.0, 2.0, 3.0}, 2);
  const auto c = cross_count(matching_graph(4, {{0, 1}, {2, 3}}), cloud);
  EXPECT_EQ(c.chi, 0u);
  EXPECT_EQ(*c.cross_pairs, 0u);
}

TEST(CrossCount, NearestNeighbourGraphWithSeparatedSamples) {
  const auto cloud = support::line_cloud({0.0, 1.0, 10.0, 11.0}, 2);
  const auto g = build_knn(cloud, 1);
  EXPECT_EQ(g.edges(), (Edges{{0, 1}, {1, 0}, {2, 3}, {3, 2}}));
  const auto c = cross_count(g, cloud);
  EXPECT_EQ(c.chi, 0u);
  EXPECT_FALSE(c.cross_pairs.has_value());
}

TEST(CrossCount, DirectedEdgesCountOnce) {
  // 2 -> 0 crosses, 0 -> 1 does not, 1 -> 2 crosses.
  const auto cloud = support::line_cloud({0.0, 1.0, 2.0}, 2);
  const Edges e{{2, 0}, {0, 1}, {1, 2}};
  EXPECT_EQ(cross_count(SampleGraph(3, e, {GraphKind::Knn, 1}), cloud).chi, 2u);
}

TEST(CrossCount, SizeMismatch) {
  const auto cloud = support::line_cloud({0.0, 1.0, 2.0}, 1);
  EXPECT_THROW(cross_count(matching_graph(4, {{0, 1}}), cloud), UsageError);
  const std::vector<char> labels{1, 0};
  EXPECT_THROW(cross_count(matching_graph(4, {{0, 1}}), labels), UsageError);
}

TEST(CrossCount, InvariantUnderSwappingTheSamples) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto cloud = support::random_cloud(seed, 13, 9, 2);
    std::vector<char> first(cloud.size()), second(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      first[i] = cloud.label(i) == Sample::First;
      second[i] = !first[i];
    }
    for (const auto& g : {build_knn(cloud, 3), build_mst(cloud),
                          matching_to_graph(solve_exact(cloud, CostFunction::euclidean()))}) {
      const auto a = cross_count(g, first);
      const auto b = cross_count(g, second);
      EXPECT_EQ(a.chi, b.chi);
      EXPECT_EQ(a.m, b.n);
      EXPECT_EQ(a.chi, cross_count(g, cloud).chi);
      EXPECT_LE(a.chi, g.edge_count());
    }
  }
}

TEST(CrossCount, MatchingAgreesWithDirectPairCount) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t m = 5 + seed % 7;
    const std::size_t n = 4 + seed % 5;
    const auto cloud = support::random_cloud(seed, m, n, 1 + seed % 3);
    const auto match = solve_greedy(cloud, CostFunction::euclidean(), seed);
    std::size_t direct = 0;
    for (auto [i, j] : match.pairs()) direct += cloud.label(i) != cloud.label(j) ? 1 : 0;
    const auto c = cross_count(matching_to_graph(match), cloud);
    EXPECT_EQ(c.chi, 2 * direct);
    EXPECT_EQ(*c.cross_pairs, direct);
    EXPECT_LE(direct, std::min(m, n));
    if ((m + n) % 2 == 0) EXPECT_EQ(direct % 2, m % 2);
  }
}
