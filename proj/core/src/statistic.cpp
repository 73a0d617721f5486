#include "crossmatch/statistic.hpp"

#include <algorithm>
#include <vector>

#include "crossmatch/error.hpp"

namespace crossmatch {

CrossCount cross_count(const SampleGraph& graph, std::span<const char> is_first) {
  if (graph.size() != is_first.size()) throw UsageError("graph and labels have different sizes");
  CrossCount out;
  out.t = graph.size();
  out.m = static_cast<std::size_t>(std::count_if(is_first.begin(), is_first.end(), [](char c) { return c != 0; }));
  out.n = out.t - out.m;
  for (std::size_t i = 0; i < graph.size(); ++i)
    for (std::size_t j : graph.out(i))
      if ((is_first[i] != 0) != (is_first[j] != 0)) ++out.chi;
  if (graph.construction().kind == GraphKind::Matching) out.cross_pairs = out.chi / 2;
  return out;
}

CrossCount cross_count(const SampleGraph& graph, const PointCloud& cloud) {
  if (graph.size() != cloud.size())
    throw UsageError("graph has " + std::to_string(graph.size()) + " nodes but cloud has " +
                     std::to_string(cloud.size()) + " points");
  std::vector<char> is_first(cloud.size(), 0);
  std::fill(is_first.begin(), is_first.begin() + static_cast<std::ptrdiff_t>(cloud.m()), 1);
  return cross_count(graph, is_first);
}

}  // namespace crossmatch
