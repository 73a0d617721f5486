#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "crossmatch/geometry.hpp"
#include "crossmatch/graphs.hpp"
#include "crossmatch/statistic.hpp"

namespace crossmatch {

/// Exact law of the number of cross-matched pairs A1 when the m FIRST
/// labels are assigned uniformly at random over a perfect matching of
/// t = m + n points. support[i] has probability pmf[i]; support is sorted
/// ascending and restricted to a1 with (m - a1) even.
struct NullDistribution {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<std::size_t> support;
  std::vector<double> pmf;

  /// P(A1 <= a1).
  double cdf(std::size_t a1) const;
  /// Mean and variance of chi = 2·A1 under this pmf.
  double chi_mean() const;
  double chi_variance() const;
};

/// Closed-form null pmf (log-gamma evaluation). Requires m, n >= 1 and even
/// t; odd t throws UnsupportedError (use pvalue_permutation).
NullDistribution null_pmf(std::size_t m, std::size_t n);

/// Shared, lazily computed null_pmf keyed on (m, n). Thread-safe.
std::shared_ptr<const NullDistribution> cached_null_pmf(std::size_t m, std::size_t n);

struct NullMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact null mean 2mn/(t-1) and variance 8m(m-1)n(n-1)/((t-1)^2 (t-3)) of
/// chi. The variance needs t >= 4; below that it throws UsageError.
NullMoments null_moments(std::size_t m, std::size_t n);
double null_mean(std::size_t m, std::size_t n);

/// Lower-tail p-value P(A1 <= observed cross pairs) from the closed form.
double pvalue_exact(const CrossCount& observed);

/// Monte Carlo permutation p-value (1 + #{chi_b <= chi_obs}) / (B + 1),
/// relabelling the fixed graph uniformly at random B times. Replicate b
/// uses its own stream derived from (seed, b).
double pvalue_permutation(const SampleGraph& graph, const PointCloud& cloud, std::size_t replicates,
                          std::uint64_t seed);

}  // namespace crossmatch
