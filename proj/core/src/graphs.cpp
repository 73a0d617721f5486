#include "crossmatch/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "crossmatch/error.hpp"

namespace crossmatch {

std::string GraphConstruction::describe() const {
  switch (kind) {
    case GraphKind::Matching:
      return "MATCHING";
    case GraphKind::Knn:
      return "KNN(" + std::to_string(k) + ")";
    case GraphKind::Mst:
      return "MST";
  }
  return "UNKNOWN";
}

SampleGraph::SampleGraph(std::size_t t, std::span<const Edge> edges, GraphConstruction construction)
    : out_(t), construction_(construction) {
  for (auto [i, j] : edges) {
    if (i >= t || j >= t) throw UsageError("graph edge endpoint out of range");
    if (i == j) throw UsageError("graph must not contain self loops");
    out_[i].push_back(j);
  }
  for (auto& adj : out_) {
    std::sort(adj.begin(), adj.end());
    if (std::adjacent_find(adj.begin(), adj.end()) != adj.end())
      throw UsageError("graph must not contain duplicate edges");
    edge_count_ += adj.size();
  }
}

std::vector<SampleGraph::Edge> SampleGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count_);
  for (std::size_t i = 0; i < out_.size(); ++i)
    for (std::size_t j : out_[i]) out.emplace_back(i, j);
  return out;
}

bool SampleGraph::has_edge(std::size_t i, std::size_t j) const {
  const auto& adj = out_.at(i);
  return std::binary_search(adj.begin(), adj.end(), j);
}

bool SampleGraph::is_symmetric() const {
  for (std::size_t i = 0; i < out_.size(); ++i)
    for (std::size_t j : out_[i])
      if (!has_edge(j, i)) return false;
  return true;
}

SampleGraph build_knn(const PointCloud& cloud, std::size_t k) {
  const std::size_t t = cloud.size();
  if (k < 1 || k + 1 > t)
    throw UsageError("K must satisfy 1 <= K <= t-1 (K = " + std::to_string(k) +
                     ", t = " + std::to_string(t) + ")");
  std::vector<SampleGraph::Edge> edges;
  edges.reserve(t * k);
  std::vector<std::pair<double, std::size_t>> cand;
  cand.reserve(t - 1);
  for (std::size_t i = 0; i < t; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < t; ++j)
      if (j != i) cand.emplace_back(cloud.distance_unchecked(i, j), j);
    // (distance, index) ordering breaks ties toward the smaller index.
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
    for (std::size_t r = 0; r < k; ++r) edges.emplace_back(i, cand[r].second);
  }
  return SampleGraph(t, edges, GraphConstruction{GraphKind::Knn, k});
}

SampleGraph build_mst(const PointCloud& cloud) {
  const std::size_t t = cloud.size();
  if (t < 2) throw UsageError("MST needs at least 2 points");
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<char> in_tree(t, 0);
  std::vector<double> best(t, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> parent(t, kNone);
  std::vector<SampleGraph::Edge> edges;
  edges.reserve(2 * (t - 1));

  best[0] = 0.0;
  for (std::size_t step = 0; step < t; ++step) {
    std::size_t u = kNone;
    for (std::size_t v = 0; v < t; ++v)
      if (!in_tree[v] && (u == kNone || best[v] < best[u])) u = v;
    in_tree[u] = 1;
    if (parent[u] != kNone) {
      edges.emplace_back(u, parent[u]);
      edges.emplace_back(parent[u], u);
    }
    for (std::size_t v = 0; v < t; ++v) {
      if (in_tree[v]) continue;
      const double d = cloud.distance_unchecked(u, v);
      if (d < best[v]) {
        best[v] = d;
        parent[v] = u;
      }
    }
  }
  return SampleGraph(t, edges, GraphConstruction{GraphKind::Mst, 0});
}

DegreeStats diag_max_degree(const SampleGraph& graph) {
  DegreeStats stats;
  std::vector<std::size_t> in(graph.size(), 0);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    stats.max_out = std::max(stats.max_out, graph.out(i).size());
    for (std::size_t j : graph.out(i)) ++in[j];
  }
  for (std::size_t d : in) stats.max_in = std::max(stats.max_in, d);
  return stats;
}

std::vector<double> diag_long_edge_fractions(const SampleGraph& graph, const PointCloud& cloud,
                                             std::span<const double> grid) {
  if (graph.size() != cloud.size()) throw UsageError("graph and cloud sizes differ");
  for (double a : grid)
    if (!(a > 0.0)) throw UsageError("long-edge scale a must be positive");
  const std::size_t t = graph.size();
  std::vector<double> out(grid.size(), 0.0);
  if (t == 0) return out;
  const double unit = std::pow(static_cast<double>(t), -1.0 / static_cast<double>(cloud.dim()));
  for (std::size_t i = 0; i < t; ++i) {
    double longest = -1.0;
    for (std::size_t j : graph.out(i)) longest = std::max(longest, cloud.distance_unchecked(i, j));
    if (longest < 0.0) continue;
    for (std::size_t g = 0; g < grid.size(); ++g)
      if (longest > grid[g] * unit) out[g] += 1.0;
  }
  for (double& f : out) f /= static_cast<double>(t);
  return out;
}

double diag_long_edge_fraction(const SampleGraph& graph, const PointCloud& cloud, double a) {
  const double grid[] = {a};
  return diag_long_edge_fractions(graph, cloud, grid).front();
}

double diag_mean_out_degree(const SampleGraph& graph) {
  if (graph.size() == 0) return 0.0;
  return static_cast<double>(graph.edge_count()) / static_cast<double>(graph.size());
}

}  // namespace crossmatch
