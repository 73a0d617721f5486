#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crossmatch/rng.hpp"

namespace crossmatch {

/// Axis-aligned box [lo, hi].
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Built-in family of sampling densities on R^d: diagonal Gaussians,
/// uniform boxes and finite mixtures of those.
class DensityModel {
 public:
  struct Gaussian {
    std::vector<double> mean;
    std::vector<double> variance;  // diagonal of the covariance
  };
  struct UniformBox {
    std::vector<double> lo;
    std::vector<double> hi;
  };
  struct Mixture {
    std::vector<DensityModel> components;
    std::vector<double> weights;  // normalized
  };

  static DensityModel gaussian(std::vector<double> mean, std::vector<double> variance);
  static DensityModel standard_gaussian(std::size_t dim);
  static DensityModel uniform_box(std::vector<double> lo, std::vector<double> hi);
  static DensityModel mixture(std::vector<DensityModel> components, std::vector<double> weights);

  std::size_t dim() const noexcept { return dim_; }
  double pdf(std::span<const double> z) const;
  /// Writes one draw into `out` (size dim()).
  void sample(Rng& rng, std::span<double> out) const;
  /// `count` row-major draws.
  std::vector<double> sample(Rng& rng, std::size_t count) const;

  bool compact_support() const;
  /// Box holding at least 1 - tail_mass of the probability.
  Box covering_box(double tail_mass) const;
  /// Coordinates along `axis` where the density is discontinuous or peaks.
  void axis_breakpoints(std::size_t axis, std::vector<double>& out) const;

  /// Round-trippable model-spec string, e.g. "gauss:mu=0,0;var=1,1".
  std::string describe() const;

  const std::variant<Gaussian, UniformBox, Mixture>& kind() const noexcept { return kind_; }

 private:
  DensityModel(std::size_t dim, std::variant<Gaussian, UniformBox, Mixture> kind)
      : dim_(dim), kind_(std::move(kind)) {}
  std::size_t dim_;
  std::variant<Gaussian, UniformBox, Mixture> kind_;
};

/// Parses a model spec:
///   gauss:mu=0,0;sigma=1,1     (sigma = per-axis standard deviations;
///                               var=... gives variances instead; a
///                               single value applies to every axis)
///   uniform:lo=0,0;hi=1,1
///   mix:0.5*gauss:mu=0;sigma=1|0.5*uniform:lo=-1;hi=1
/// Throws ParseError on malformed input.
DensityModel parse_density(std::string_view spec);

}  // namespace crossmatch
