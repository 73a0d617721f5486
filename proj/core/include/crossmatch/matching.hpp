#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "crossmatch/geometry.hpp"

namespace crossmatch {

class SampleGraph;

enum class SolverKind { Exact, Greedy, BruteForce };

std::string_view to_string(SolverKind kind) noexcept;

/// Involution with at most one fixed point, i.e. a (near-)perfect matching
/// on 0..t-1. Invariants are validated by make().
class Matching {
 public:
  /// Throws std::logic_error if `partner` is not an involution with at most
  /// one fixed point, or if the fixed point does not agree with the parity of t.
  static Matching make(std::vector<std::size_t> partner, double total_cost, SolverKind solver);

  std::size_t size() const noexcept { return partner_.size(); }
  std::size_t partner(std::size_t k) const { return partner_.at(k); }
  const std::vector<std::size_t>& partners() const noexcept { return partner_; }
  std::optional<std::size_t> fixed_point() const noexcept { return fixed_point_; }
  double total_cost() const noexcept { return total_cost_; }
  SolverKind solver() const noexcept { return solver_; }

  /// Matched pairs (i, j) with i < j, sorted by i.
  std::vector<std::pair<std::size_t, std::size_t>> pairs() const;

 private:
  Matching() = default;
  std::vector<std::size_t> partner_;
  std::optional<std::size_t> fixed_point_;
  double total_cost_ = 0.0;
  SolverKind solver_ = SolverKind::Exact;
};

/// Sum of cf(distance) over matched pairs, in pair order (smaller index first).
double matching_cost(const PointCloud& cloud, const CostFunction& cf,
                     const std::vector<std::size_t>& partner);

/// Tie-breaking for solvers: with a seed the vertex order is shuffled by a
/// seeded RNG; without one the input order is used (lexicographic ties).
using TieSeed = std::optional<std::uint64_t>;

/// Global minimizer of the summed edge cost over all involutions with at most
/// one fixed point. Odd t uses a zero-cost virtual vertex whose partner
/// becomes the fixed point. Throws UsageError for t < 2.
Matching solve_exact(const PointCloud& cloud, const CostFunction& cf, TieSeed seed = std::nullopt);

/// Repeatedly pairs the closest remaining pair in Euclidean distance. For
/// odd t the last remaining point is the fixed point. cf only affects the
/// reported total cost.
Matching solve_greedy(const PointCloud& cloud, const CostFunction& cf, TieSeed seed = std::nullopt);

inline constexpr std::size_t kBruteForceLimit = 12;

/// Exhaustive enumeration; returns the first minimizer in enumeration order.
/// Refuses t > 12 and t < 2. `enumerated` receives the number of
/// candidate matchings visited.
Matching solve_brute_force(const PointCloud& cloud, const CostFunction& cf,
                           std::uint64_t* enumerated = nullptr);

/// Number of involutions with at most one fixed point that are admissible
/// for t points: (t-1)!! for even t, t·(t-2)!! for odd t.
std::uint64_t count_matchings(std::size_t t);

/// Symmetric graph with i→j and j→i per matched pair.
SampleGraph matching_to_graph(const Matching& matching);

}  // namespace crossmatch
