#include "crossmatch/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "crossmatch/detail/parallel.hpp"
#include "crossmatch/error.hpp"

namespace crossmatch {

std::string_view to_string(LimitMethod method) noexcept {
  return method == LimitMethod::Quadrature ? "QUADRATURE" : "MONTE_CARLO";
}

std::string_view to_string(Decision decision) noexcept {
  return decision == Decision::Reject ? "REJECT" : "RETAIN";
}

namespace {

double integrand(const DensityModel& f, const DensityModel& g, double p, std::span<const double> z) {
  const double fz = f.pdf(z);
  const double gz = g.pdf(z);
  const double den = p * fz + (1.0 - p) * gz;
  return den > 0.0 ? fz * gz / den : 0.0;
}

struct AxisPieces {
  std::vector<double> cuts;  // sorted, first = lo, last = hi
};

class NestedQuadrature {
 public:
  NestedQuadrature(const DensityModel& f, const DensityModel& g, double p, std::vector<AxisPieces> axes,
                   const LimitOptions& options)
      : f_(f), g_(g), p_(p), axes_(std::move(axes)), options_(options), point_(axes_.size()) {}

  double integrate(double& error) {
    error = 0.0;
    return level(0, error);
  }

  std::size_t evaluations() const noexcept { return evaluations_; }

 private:
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

  double level(std::size_t axis, double& error) {
    const auto& cuts = axes_[axis].cuts;
    double total = 0.0;
    for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
      double piece_error = 0.0;
      double inner_error_sum = 0.0;
      std::size_t inner_calls = 0;
      auto fn = [&](double x) {
        point_[axis] = x;
        if (axis + 1 == axes_.size()) {
          ++evaluations_;
          return integrand(f_, g_, p_, point_);
        }
        double inner_error = 0.0;
        const double v = level(axis + 1, inner_error);
        inner_error_sum += inner_error;
        ++inner_calls;
        return v;
      };
      const double width = cuts[piece + 1] - cuts[piece];
      total += GK::integrate(fn, cuts[piece], cuts[piece + 1], options_.max_depth, options_.tolerance,
                             &piece_error);
      // Inner errors propagate as (mean inner error) × (width of this piece).
      const double inner = inner_calls ? inner_error_sum / static_cast<double>(inner_calls) * width : 0.0;
      error += piece_error + inner;
    }
    return total;
  }

  const DensityModel& f_;
  const DensityModel& g_;
  double p_;
  std::vector<AxisPieces> axes_;
  LimitOptions options_;
  std::vector<double> point_;
  std::size_t evaluations_ = 0;
};

LimitEstimate by_quadrature(const DensityModel& f, const DensityModel& g, double p, double delta,
                            const LimitOptions& options) {
  const std::size_t d = f.dim();
  const Box bf = f.covering_box(options.tail_mass);
  const Box bg = g.covering_box(options.tail_mass);
  std::vector<AxisPieces> axes(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double lo = std::min(bf.lo[k], bg.lo[k]);
    const double hi = std::max(bf.hi[k], bg.hi[k]);
    std::vector<double> cuts{lo, hi};
    f.axis_breakpoints(k, cuts);
    g.axis_breakpoints(k, cuts);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::remove_if(cuts.begin(), cuts.end(), [&](double c) { return c < lo || c > hi; }), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    axes[k].cuts = std::move(cuts);
  }
  NestedQuadrature quad(f, g, p, std::move(axes), options);
  double err = 0.0;
  const double integral = quad.integrate(err);
  // Mass outside the box: the integrand is bounded by f/(1-p) and by g/p.
  const double outside = std::min(options.tail_mass / (1.0 - p), options.tail_mass / p);
  const double scale = 2.0 * delta * p * (1.0 - p);
  LimitEstimate est;
  est.value = scale * integral;
  est.p = p;
  est.delta = delta;
  est.method = LimitMethod::Quadrature;
  est.error_estimate = scale * (err + outside);
  est.evaluations = quad.evaluations();
  if (!std::isfinite(est.value) || !std::isfinite(est.error_estimate) || est.error_estimate > 1e-6) {
    std::ostringstream os;
    os << "limit quadrature failed: value = " << est.value << ", error estimate = " << est.error_estimate
       << ", evaluations = " << est.evaluations;
    throw NumericalError(os.str());
  }
  return est;
}

LimitEstimate by_monte_carlo(const DensityModel& f, const DensityModel& g, double p, double delta,
                             const LimitOptions& options) {
  if (options.mc_samples < 2) throw UsageError("Monte Carlo needs at least 2 samples");
  constexpr std::size_t kChunk = 1 << 16;
  const std::size_t chunks = (options.mc_samples + kChunk - 1) / kChunk;
  std::vector<double> sums(chunks, 0.0);
  std::vector<double> sums_sq(chunks, 0.0);
  detail::parallel_for(chunks, [&](std::size_t c) {
    auto rng = make_rng(options.seed, {0x6d63ULL, c});
    std::bernoulli_distribution from_f(p);
    std::vector<double> z(f.dim());
    const std::size_t count = std::min(kChunk, options.mc_samples - c * kChunk);
    double s = 0.0;
    double s2 = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      if (from_f(rng))
        f.sample(rng, z);
      else
        g.sample(rng, z);
      const double fz = f.pdf(z);
      const double gz = g.pdf(z);
      const double q = p * fz + (1.0 - p) * gz;
      const double w = q > 0.0 ? fz * gz / (q * q) : 0.0;
      s += w;
      s2 += w * w;
    }
    sums[c] = s;
    sums_sq[c] = s2;
  });
  double s = 0.0;
  double s2 = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    s += sums[c];
    s2 += sums_sq[c];
  }
  const double n = static_cast<double>(options.mc_samples);
  const double mean = s / n;
  const double var = std::max(0.0, (s2 - n * mean * mean) / (n - 1.0));
  const double scale = 2.0 * delta * p * (1.0 - p);
  LimitEstimate est;
  est.value = scale * mean;
  est.p = p;
  est.delta = delta;
  est.method = LimitMethod::MonteCarlo;
  est.error_estimate = scale * std::sqrt(var / n);
  est.evaluations = options.mc_samples;
  if (!std::isfinite(est.value)) throw NumericalError("Monte Carlo limit estimate is not finite");
  return est;
}

}  // namespace

LimitEstimate limit_integral(const DensityModel& f, const DensityModel& g, double p, double delta,
                             std::optional<LimitMethod> method, const LimitOptions& options) {
  if (!(p > 0.0 && p < 1.0)) throw UsageError("p must lie in (0, 1)");
  if (!(delta > 0.0)) throw UsageError("delta must be positive");
  if (f.dim() != g.dim()) throw UsageError("f and g have different dimensions");
  const LimitMethod chosen = method.value_or(f.dim() <= 3 ? LimitMethod::Quadrature : LimitMethod::MonteCarlo);
  if (chosen == LimitMethod::Quadrature) {
    if (f.dim() > 3) throw UsageError("quadrature is limited to d <= 3; use Monte Carlo");
    return by_quadrature(f, g, p, delta, options);
  }
  return by_monte_carlo(f, g, p, delta, options);
}

Decision asymptotic_test(const CrossCount& observed, double eta) {
  if (!(eta > 0.0)) throw UsageError("eta must be positive");
  if (observed.t == 0) throw UsageError("empty sample");
  const double t = static_cast<double>(observed.t);
  const double p_hat = static_cast<double>(observed.m) / t;
  const double stat = static_cast<double>(observed.chi) / t;
  return stat < 2.0 * p_hat * (1.0 - p_hat) - eta ? Decision::Reject : Decision::Retain;
}

double eta_schedule(std::size_t t, double c, double gamma) {
  if (!(c > 0.0)) throw UsageError("eta schedule constant c must be positive");
  if (!(gamma > 0.0 && gamma < 0.5)) throw UsageError("eta schedule exponent gamma must lie in (0, 1/2)");
  if (t == 0) throw UsageError("eta schedule needs t >= 1");
  return c * std::pow(static_cast<double>(t), -gamma);
}

}  // namespace crossmatch
