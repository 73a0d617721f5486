#include "crossmatch/nulldist.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <shared_mutex>
#include <string>

#include "crossmatch/error.hpp"
#include "crossmatch/nulldist_exact.hpp"
#include "crossmatch/rng.hpp"

namespace crossmatch {

namespace {

void require_closed_form(std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw UsageError("null distribution needs m >= 1 and n >= 1");
  if ((m + n) % 2 != 0)
    throw UnsupportedError("closed-form null distribution needs an even total size (t = " +
                           std::to_string(m + n) + "); use permutation calibration");
}

double log_factorial(std::size_t k) { return std::lgamma(static_cast<double>(k) + 1.0); }

}  // namespace

double NullDistribution::cdf(std::size_t a1) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < support.size() && support[i] <= a1; ++i) acc += pmf[i];
  return std::min(acc, 1.0);
}

double NullDistribution::chi_mean() const {
  double mu = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) mu += pmf[i] * 2.0 * static_cast<double>(support[i]);
  return mu;
}

double NullDistribution::chi_variance() const {
  const double mu = chi_mean();
  double v = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    const double d = 2.0 * static_cast<double>(support[i]) - mu;
    v += pmf[i] * d * d;
  }
  return v;
}

NullDistribution null_pmf(std::size_t m, std::size_t n) {
  require_closed_form(m, n);
  const std::size_t t = m + n;
  const std::size_t pairs = t / 2;
  // P(a1) = 2^a1 · I! / (C(t, m) · a0! · a1! · a2!), a0 = (n - a1)/2, a2 = (m - a1)/2.
  const double log_norm = log_factorial(pairs) - (log_factorial(t) - log_factorial(m) - log_factorial(n));
  NullDistribution dist;
  dist.m = m;
  dist.n = n;
  for (std::size_t a1 = m % 2; a1 <= std::min(m, n); a1 += 2) {
    const std::size_t a0 = (n - a1) / 2;
    const std::size_t a2 = (m - a1) / 2;
    const double lp = static_cast<double>(a1) * std::log(2.0) + log_norm - log_factorial(a0) -
                      log_factorial(a1) - log_factorial(a2);
    dist.support.push_back(a1);
    dist.pmf.push_back(std::exp(lp));
  }
  return dist;
}

std::shared_ptr<const NullDistribution> cached_null_pmf(std::size_t m, std::size_t n) {
  static std::shared_mutex mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const NullDistribution>> cache;
  const auto key = std::pair{m, n};
  {
    std::shared_lock lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto dist = std::make_shared<const NullDistribution>(null_pmf(m, n));
  std::unique_lock lock(mutex);
  auto [it, inserted] = cache.emplace(key, std::move(dist));
  return it->second;
}

std::map<std::size_t, Rational> null_pmf_rational(std::size_t m, std::size_t n) {
  using boost::multiprecision::cpp_int;
  require_closed_form(m, n);
  const std::size_t t = m + n;
  std::vector<cpp_int> fact(t + 1);
  fact[0] = 1;
  for (std::size_t k = 1; k <= t; ++k) fact[k] = fact[k - 1] * k;
  const cpp_int choose = fact[t] / (fact[m] * fact[n]);
  std::map<std::size_t, Rational> out;
  for (std::size_t a1 = m % 2; a1 <= std::min(m, n); a1 += 2) {
    const std::size_t a0 = (n - a1) / 2;
    const std::size_t a2 = (m - a1) / 2;
    const cpp_int num = (cpp_int(1) << a1) * fact[t / 2];
    const cpp_int den = choose * fact[a0] * fact[a1] * fact[a2];
    out.emplace(a1, Rational(num, den));
  }
  return out;
}

double null_mean(std::size_t m, std::size_t n) {
  if (m == 0 || n == 0) throw UsageError("null moments need m >= 1 and n >= 1");
  const double t = static_cast<double>(m + n);
  return 2.0 * static_cast<double>(m) * static_cast<double>(n) / (t - 1.0);
}

NullMoments null_moments(std::size_t m, std::size_t n) {
  const double mean = null_mean(m, n);
  const std::size_t t = m + n;
  if (t < 4) throw UsageError("null variance is undefined for t < 4");
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double td = static_cast<double>(t);
  const double var = 8.0 * md * (md - 1.0) * nd * (nd - 1.0) / ((td - 1.0) * (td - 1.0) * (td - 3.0));
  return {mean, var};
}

double pvalue_exact(const CrossCount& observed) {
  if (!observed.cross_pairs)
    throw UsageError("exact p-value needs a matching graph (cross_pairs unavailable)");
  if (observed.t % 2 != 0)
    throw UnsupportedError("exact p-value needs an even total size; use permutation calibration");
  const auto dist = cached_null_pmf(observed.m, observed.n);
  return dist->cdf(*observed.cross_pairs);
}

double pvalue_permutation(const SampleGraph& graph, const PointCloud& cloud, std::size_t replicates,
                          std::uint64_t seed) {
  if (replicates < 1) throw UsageError("permutation count must be at least 1");
  const auto observed = cross_count(graph, cloud);
  std::vector<char> labels(cloud.size(), 0);
  std::size_t at_most = 0;
  for (std::size_t b = 0; b < replicates; ++b) {
    std::fill(labels.begin(), labels.end(), 0);
    std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(cloud.m()), 1);
    auto rng = make_rng(seed, {0x7065'726dULL, b});
    std::shuffle(labels.begin(), labels.end(), rng);
    if (cross_count(graph, labels).chi <= observed.chi) ++at_most;
  }
  return static_cast<double>(1 + at_most) / static_cast<double>(replicates + 1);
}

}  // namespace crossmatch
