#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crossmatch/geometry.hpp"

namespace crossmatch {

enum class GraphKind { Matching, Knn, Mst };

struct GraphConstruction {
  GraphKind kind = GraphKind::Matching;
  std::size_t k = 0;  // neighbours for Knn

  std::string describe() const;
};

/// Simple directed graph on sample indices 0..t-1. Stored as out-adjacency
/// lists; no self loops and no duplicate directed edges.
class SampleGraph {
 public:
  using Edge = std::pair<std::size_t, std::size_t>;

  /// Throws UsageError on self loops, duplicates or out-of-range endpoints.
  SampleGraph(std::size_t t, std::span<const Edge> edges, GraphConstruction construction);

  std::size_t size() const noexcept { return out_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  const GraphConstruction& construction() const noexcept { return construction_; }
  const std::vector<std::size_t>& out(std::size_t i) const { return out_.at(i); }
  std::vector<Edge> edges() const;
  bool has_edge(std::size_t i, std::size_t j) const;
  bool is_symmetric() const;

 private:
  std::vector<std::vector<std::size_t>> out_;
  std::size_t edge_count_ = 0;
  GraphConstruction construction_;
};

/// Directed K-nearest-neighbour graph. Distance ties go to the smaller index.
SampleGraph build_knn(const PointCloud& cloud, std::size_t k);

/// Euclidean minimum spanning tree (Prim, dense), stored symmetrically.
/// Ties are resolved in favour of the smaller index.
SampleGraph build_mst(const PointCloud& cloud);

struct DegreeStats {
  std::size_t max_out = 0;
  std::size_t max_in = 0;
};

DegreeStats diag_max_degree(const SampleGraph& graph);

/// Fraction of nodes with at least one out-edge longer than a·t^(-1/d).
double diag_long_edge_fraction(const SampleGraph& graph, const PointCloud& cloud, double a);

/// Long-edge fractions for each a in `grid`, computed in one pass.
std::vector<double> diag_long_edge_fractions(const SampleGraph& graph, const PointCloud& cloud,
                                             std::span<const double> grid);

double diag_mean_out_degree(const SampleGraph& graph);

}  // namespace crossmatch
