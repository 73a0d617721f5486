#include "crossmatch/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>
#include <tuple>

#include "crossmatch/detail/blossom.hpp"
#include "crossmatch/detail/exact_dense.hpp"
#include "crossmatch/error.hpp"
#include "crossmatch/graphs.hpp"
#include "crossmatch/rng.hpp"

namespace crossmatch {

std::string_view to_string(SolverKind kind) noexcept {
  switch (kind) {
    case SolverKind::Exact:
      return "EXACT";
    case SolverKind::Greedy:
      return "GREEDY";
    case SolverKind::BruteForce:
      return "BRUTE_FORCE";
  }
  return "UNKNOWN";
}

Matching Matching::make(std::vector<std::size_t> partner, double total_cost, SolverKind solver) {
  const std::size_t t = partner.size();
  std::optional<std::size_t> fixed;
  for (std::size_t k = 0; k < t; ++k) {
    const std::size_t p = partner[k];
    if (p >= t || partner[p] != k) throw std::logic_error("matching is not an involution");
    if (p == k) {
      if (fixed) throw std::logic_error("matching has more than one fixed point");
      fixed = k;
    }
  }
  if (fixed.has_value() != (t % 2 == 1))
    throw std::logic_error("matching must have a fixed point exactly when t is odd");
  if (!(total_cost >= 0.0)) throw std::logic_error("matching cost must be non-negative");
  Matching m;
  m.partner_ = std::move(partner);
  m.fixed_point_ = fixed;
  m.total_cost_ = total_cost;
  m.solver_ = solver;
  return m;
}

std::vector<std::pair<std::size_t, std::size_t>> Matching::pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(partner_.size() / 2);
  for (std::size_t k = 0; k < partner_.size(); ++k)
    if (k < partner_[k]) out.emplace_back(k, partner_[k]);
  return out;
}

double matching_cost(const PointCloud& cloud, const CostFunction& cf,
                     const std::vector<std::size_t>& partner) {
  double total = 0.0;
  for (std::size_t k = 0; k < partner.size(); ++k)
    if (k < partner[k]) total += cf(cloud.distance(k, partner[k]));
  return total;
}

namespace {

void require_matchable(const PointCloud& cloud) {
  if (cloud.size() < 2)
    throw UsageError("matching needs at least 2 points, got " + std::to_string(cloud.size()));
}

std::vector<std::size_t> vertex_order(std::size_t t, const TieSeed& seed) {
  std::vector<std::size_t> order(t);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (seed) {
    auto rng = make_rng(*seed, {0x7469'6573ULL});
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

// Integer resolution for the blossom solver's edge weights.
constexpr std::int64_t kWeightScale = std::int64_t{1} << 40;

}  // namespace

namespace {

// Quantized edge weights for the blossom solver. Costs are mapped to
// kWeightScale - round(cost · scale) so that maximising weight over perfect
// matchings minimises total cost. The virtual vertex (odd t) joins every
// real vertex at cost 0.
class QuantizedCosts {
 public:
  QuantizedCosts(const PointCloud& cloud, const CostFunction& cf, const std::vector<std::size_t>& order)
      : cloud_(cloud), cf_(cf), order_(order), t_(cloud.size()) {
    double max_cost = 0.0;
    for (std::size_t i = 0; i < t_; ++i)
      for (std::size_t j = i + 1; j < t_; ++j) max_cost = std::max(max_cost, raw(i, j));
    if (!std::isfinite(max_cost)) throw NumericalError("non-finite edge cost");
    scale_ = max_cost > 0.0 ? static_cast<double>(kWeightScale) / max_cost : 0.0;
  }

  std::size_t points() const noexcept { return t_; }
  std::size_t vertices() const noexcept { return t_ + (t_ % 2); }

  double raw(std::size_t i, std::size_t j) const { return cf_(cloud_.distance_unchecked(order_[i], order_[j])); }

  std::int64_t weight(std::size_t i, std::size_t j) const {
    if (i >= t_ || j >= t_) return kWeightScale;
    return kWeightScale - static_cast<std::int64_t>(std::llround(raw(i, j) * scale_));
  }

  detail::WeightedEdge edge(std::size_t i, std::size_t j) const {
    return {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), weight(i, j)};
  }

 private:
  const PointCloud& cloud_;
  const CostFunction& cf_;
  const std::vector<std::size_t>& order_;
  std::size_t t_;
  double scale_ = 0.0;
};

std::vector<std::int64_t> solve_complete(const QuantizedCosts& costs) {
  const std::size_t v = costs.vertices();
  std::vector<detail::WeightedEdge> edges;
  edges.reserve(v * (v - 1) / 2);
  for (std::size_t i = 0; i < v; ++i)
    for (std::size_t j = i + 1; j < v; ++j) edges.push_back(costs.edge(i, j));
  return detail::max_weight_matching(v, edges, /*max_cardinality=*/true);
}

bool is_perfect(const std::vector<std::int64_t>& mate) {
  return std::all_of(mate.begin(), mate.end(), [](std::int64_t x) { return x >= 0; });
}

// Solves on a sparse candidate graph (K nearest neighbours by cost plus any
// edges found violating the dual certificate) until the dual solution is
// feasible for every edge of the complete graph, which proves the matching
// optimal there too.
std::vector<std::int64_t> solve_certified(const QuantizedCosts& costs) {
  constexpr std::size_t kInitialNeighbours = 10;
  const std::size_t t = costs.points();
  const std::size_t v = costs.vertices();
  std::size_t k = std::min(kInitialNeighbours, t - 1);

  std::vector<std::vector<std::uint32_t>> adj(v);
  auto add_edge = [&](std::size_t i, std::size_t j) {
    adj[i].push_back(static_cast<std::uint32_t>(j));
    adj[j].push_back(static_cast<std::uint32_t>(i));
  };
  auto add_neighbours = [&](std::size_t count) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t i = 0; i < t; ++i) {
      cand.clear();
      for (std::size_t j = 0; j < t; ++j)
        if (j != i) cand.emplace_back(costs.raw(i, j), j);
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(count), cand.end());
      for (std::size_t r = 0; r < count; ++r) add_edge(i, cand[r].second);
    }
  };
  auto normalize = [&] {
    for (auto& a : adj) {
      std::sort(a.begin(), a.end());
      a.erase(std::unique(a.begin(), a.end()), a.end());
    }
  };

  add_neighbours(k);
  if (v > t)
    for (std::size_t i = 0; i < t; ++i) add_edge(i, t);
  normalize();

  std::vector<char> present(v, 0);
  while (true) {
    std::vector<detail::WeightedEdge> edges;
    for (std::size_t i = 0; i < v; ++i)
      for (std::uint32_t j : adj[i])
        if (i < j) edges.push_back(costs.edge(i, j));
    detail::MatchingDuals duals;
    auto mate = detail::max_weight_matching(v, edges, /*max_cardinality=*/true, &duals);
    if (!is_perfect(mate)) {
      if (k >= t - 1) throw NumericalError("no perfect matching on the complete graph");
      k = std::min(2 * k, t - 1);
      add_neighbours(k);
      normalize();
      continue;
    }

    std::vector<std::pair<std::size_t, std::size_t>> violated;
    for (std::size_t i = 0; i < t; ++i) {
      for (std::uint32_t j : adj[i]) present[j] = 1;
      for (std::size_t j = i + 1; j < t; ++j) {
        if (present[j]) continue;
        if (!duals.feasible(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), costs.weight(i, j)))
          violated.emplace_back(i, j);
      }
      for (std::uint32_t j : adj[i]) present[j] = 0;
    }
    if (violated.empty()) return mate;
    for (auto [i, j] : violated) add_edge(i, j);
    normalize();
  }
}

Matching finish_exact(const PointCloud& cloud, const CostFunction& cf, const std::vector<std::size_t>& order,
                      const std::vector<std::int64_t>& mate) {
  const std::size_t t = cloud.size();
  std::vector<std::size_t> partner(t);
  for (std::size_t i = 0; i < t; ++i) {
    if (mate[i] < 0) throw NumericalError("blossom solver returned an imperfect matching");
    const auto j = static_cast<std::size_t>(mate[i]);
    partner[order[i]] = j == t ? order[i] : order[j];
  }
  const double total = matching_cost(cloud, cf, partner);
  return Matching::make(std::move(partner), total, SolverKind::Exact);
}

}  // namespace

Matching solve_exact(const PointCloud& cloud, const CostFunction& cf, TieSeed seed) {
  require_matchable(cloud);
  const auto order = vertex_order(cloud.size(), seed);
  const QuantizedCosts costs(cloud, cf, order);
  return finish_exact(cloud, cf, order, solve_certified(costs));
}

namespace detail {

Matching solve_exact_dense(const PointCloud& cloud, const CostFunction& cf, TieSeed seed) {
  require_matchable(cloud);
  const auto order = vertex_order(cloud.size(), seed);
  const QuantizedCosts costs(cloud, cf, order);
  return finish_exact(cloud, cf, order, solve_complete(costs));
}

}  // namespace detail

Matching solve_greedy(const PointCloud& cloud, const CostFunction& cf, TieSeed seed) {
  require_matchable(cloud);
  const std::size_t t = cloud.size();
  const auto order = vertex_order(t, seed);
  std::vector<std::size_t> rank(t);
  for (std::size_t pos = 0; pos < t; ++pos) rank[order[pos]] = pos;

  const DistanceTable dist(cloud, /*dense=*/false);
  std::vector<char> alive(t, 1);

  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  // Nearest alive neighbour of i; distance ties go to the lower rank.
  auto nearest = [&](std::size_t i) {
    std::size_t best = kNone;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < t; ++j) {
      if (j == i || !alive[j]) continue;
      const double d = dist(i, j);
      if (d < best_d || (d == best_d && rank[j] < rank[best])) {
        best = j;
        best_d = d;
      }
    }
    return std::pair{best, best_d};
  };

  // (distance, lower rank, higher rank, owner, candidate); lexicographic min-heap.
  using Entry = std::tuple<double, std::size_t, std::size_t, std::size_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  auto push = [&](std::size_t i) {
    auto [j, d] = nearest(i);
    if (j == kNone) return;
    heap.emplace(d, std::min(rank[i], rank[j]), std::max(rank[i], rank[j]), i, j);
  };
  for (std::size_t i = 0; i < t; ++i) push(i);

  std::vector<std::size_t> partner(t);
  std::iota(partner.begin(), partner.end(), std::size_t{0});
  while (!heap.empty()) {
    auto [d, r1, r2, i, j] = heap.top();
    heap.pop();
    if (!alive[i]) continue;
    if (!alive[j]) {
      push(i);  // stale candidate: recompute among the remaining points
      continue;
    }
    partner[i] = j;
    partner[j] = i;
    alive[i] = alive[j] = 0;
  }
  const double total = matching_cost(cloud, cf, partner);
  return Matching::make(std::move(partner), total, SolverKind::Greedy);
}

std::uint64_t count_matchings(std::size_t t) {
  if (t < 2) return t == 1 ? 1 : 0;
  std::uint64_t c = 1;
  if (t % 2 == 0) {
    for (std::size_t k = t - 1; k > 1; k -= 2) c *= k;
  } else {
    c = t;
    for (std::size_t k = t - 2; k > 1; k -= 2) c *= k;
  }
  return c;
}

namespace {

struct BruteForceSearch {
  const PointCloud& cloud;
  const CostFunction& cf;
  std::size_t t;
  std::vector<std::size_t> current;
  std::vector<char> used;
  std::vector<std::size_t> best;
  double best_cost = std::numeric_limits<double>::infinity();
  std::uint64_t visited = 0;

  void recurse(bool fixed_available, double cost) {
    std::size_t i = 0;
    while (i < t && used[i]) ++i;
    if (i == t) {
      ++visited;
      if (cost < best_cost) {
        best_cost = cost;
        best = current;
      }
      return;
    }
    used[i] = 1;
    for (std::size_t j = i + 1; j < t; ++j) {
      if (used[j]) continue;
      used[j] = 1;
      current[i] = j;
      current[j] = i;
      recurse(fixed_available, cost + cf(cloud.distance_unchecked(i, j)));
      used[j] = 0;
    }
    if (fixed_available) {
      current[i] = i;
      recurse(false, cost);
    }
    used[i] = 0;
  }
};

}  // namespace

Matching solve_brute_force(const PointCloud& cloud, const CostFunction& cf, std::uint64_t* enumerated) {
  require_matchable(cloud);
  const std::size_t t = cloud.size();
  if (t > kBruteForceLimit)
    throw UsageError("brute-force matching refused for t = " + std::to_string(t) + " > " +
                     std::to_string(kBruteForceLimit));
  BruteForceSearch search{cloud, cf, t, std::vector<std::size_t>(t), std::vector<char>(t, 0), {}};
  search.recurse(t % 2 == 1, 0.0);
  if (enumerated) *enumerated = search.visited;
  const double total = matching_cost(cloud, cf, search.best);
  return Matching::make(std::move(search.best), total, SolverKind::BruteForce);
}

SampleGraph matching_to_graph(const Matching& matching) {
  std::vector<SampleGraph::Edge> edges;
  edges.reserve(matching.size());
  for (std::size_t k = 0; k < matching.size(); ++k)
    if (matching.partner(k) != k) edges.emplace_back(k, matching.partner(k));
  return SampleGraph(matching.size(), edges, GraphConstruction{GraphKind::Matching, 0});
}

}  // namespace crossmatch
