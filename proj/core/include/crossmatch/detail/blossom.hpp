#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace crossmatch::detail {

struct WeightedEdge {
  std::uint32_t u;
  std::uint32_t v;
  std::int64_t weight;
};

/// Final dual solution of max_weight_matching. Entries 0..V-1 are vertex
/// duals, V..2V-1 blossom duals (zero for unused slots); parent[x] is the
/// enclosing blossom of vertex or blossom x, or -1 at top level. For an edge
/// (i, j, w) the reduced cost is
///   dual[i] + dual[j] - 2w + 2 · Σ dual[B] over blossoms B containing i and j,
/// which is non-negative for every edge at optimality.
struct MatchingDuals {
  std::vector<std::int64_t> dual;
  std::vector<int> parent;

  /// Reduced cost of a (possibly absent) edge under these duals.
  std::int64_t reduced_cost(std::uint32_t i, std::uint32_t j, std::int64_t weight) const;

  /// reduced_cost(i, j, weight) >= 0. Blossom duals are non-negative, so the
  /// nesting walk is skipped whenever the vertex duals alone suffice.
  bool feasible(std::uint32_t i, std::uint32_t j, std::int64_t weight) const {
    return dual[i] + dual[j] - 2 * weight >= 0 || reduced_cost(i, j, weight) >= 0;
  }
};

/// Maximum-weight matching on a general undirected graph (Edmonds'
/// primal-dual blossom method, O(V^3)). With `max_cardinality` set, only
/// matchings of maximum cardinality are considered. Weights are integers so
/// that dual updates are exact; |weight| must stay below 2^60.
///
/// Returns mate[v] (the partner of v) or -1 for unmatched vertices.
std::vector<std::int64_t> max_weight_matching(std::size_t vertex_count,
                                              std::span<const WeightedEdge> edges,
                                              bool max_cardinality,
                                              MatchingDuals* duals = nullptr);

}  // namespace crossmatch::detail
