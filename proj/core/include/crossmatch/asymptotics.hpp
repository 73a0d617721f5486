#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "crossmatch/density.hpp"
#include "crossmatch/statistic.hpp"

namespace crossmatch {

enum class LimitMethod { Quadrature, MonteCarlo };

std::string_view to_string(LimitMethod method) noexcept;

/// Almost-sure limit of chi/t for a degree-δ graph family:
/// 2δ·p(1-p)·∫ f g / (p f + (1-p) g) dz.
struct LimitEstimate {
  double value = 0.0;
  double p = 0.0;
  double delta = 1.0;
  LimitMethod method = LimitMethod::Quadrature;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct LimitOptions {
  /// Relative tolerance for each nested quadrature level.
  double tolerance = 1e-10;
  /// Probability mass of each density allowed outside the integration box.
  double tail_mass = 1e-10;
  unsigned max_depth = 18;
  std::size_t mc_samples = 1'000'000;
  std::uint64_t seed = 0x5eedULL;
};

/// Evaluates the limit by nested adaptive Gauss-Kronrod quadrature
/// (d <= 3) or by importance sampling from p f + (1-p) g. With no method
/// given, quadrature is used up to d = 3. Throws NumericalError when the
/// result is non-finite or the quadrature error exceeds 1e-6.
LimitEstimate limit_integral(const DensityModel& f, const DensityModel& g, double p, double delta,
                             std::optional<LimitMethod> method = std::nullopt,
                             const LimitOptions& options = {});

enum class Decision { Reject, Retain };

std::string_view to_string(Decision decision) noexcept;

/// Threshold test: reject iff chi/t < 2 p̂(1 - p̂) - eta with p̂ = m/t.
Decision asymptotic_test(const CrossCount& observed, double eta);

/// η_t = c · t^(-gamma), which tends to 0 while η_t·√t grows, for 0 < gamma < 1/2.
double eta_schedule(std::size_t t, double c, double gamma);

}  // namespace crossmatch
