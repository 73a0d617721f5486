#pragma once

#include "crossmatch/matching.hpp"

namespace crossmatch::detail {

/// solve_exact on the complete graph without candidate sparsification.
/// O(t^3) with a large constant; used to cross-check solve_exact.
Matching solve_exact_dense(const PointCloud& cloud, const CostFunction& cf, TieSeed seed = std::nullopt);

}  // namespace crossmatch::detail
