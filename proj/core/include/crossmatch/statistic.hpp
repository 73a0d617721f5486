#pragma once

#include <cstddef>
#include <optional>

#include "crossmatch/geometry.hpp"
#include "crossmatch/graphs.hpp"

namespace crossmatch {

/// Cross-count of a graph over a labelled sample. `chi` counts directed
/// edges joining opposite samples, both directions, so a matched cross
/// pair contributes 2. `cross_pairs` is the undirected count (set for
/// matching graphs only).
struct CrossCount {
  std::size_t chi = 0;
  std::optional<std::size_t> cross_pairs;
  std::size_t t = 0;
  std::size_t m = 0;
  std::size_t n = 0;
};

CrossCount cross_count(const SampleGraph& graph, const PointCloud& cloud);

/// Cross-count under an arbitrary FIRST/SECOND assignment (`is_first[i]`),
/// used by permutation calibration. m is taken from the labels.
CrossCount cross_count(const SampleGraph& graph, std::span<const char> is_first);

}  // namespace crossmatch
