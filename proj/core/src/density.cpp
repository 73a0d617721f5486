#include "crossmatch/density.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>

#include "crossmatch/error.hpp"

namespace crossmatch {

namespace {

void require_dim(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw UsageError(std::string(what) + ": dimension mismatch");
  if (a == 0) throw UsageError(std::string(what) + ": dimension must be at least 1");
}

template <typename... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <typename... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace

DensityModel DensityModel::gaussian(std::vector<double> mean, std::vector<double> variance) {
  require_dim(mean.size(), variance.size(), "gaussian");
  for (double v : variance)
    if (!(v > 0.0) || !std::isfinite(v)) throw UsageError("gaussian variance must be positive");
  for (double v : mean)
    if (!std::isfinite(v)) throw UsageError("gaussian mean must be finite");
  const auto d = mean.size();
  return DensityModel(d, Gaussian{std::move(mean), std::move(variance)});
}

DensityModel DensityModel::standard_gaussian(std::size_t dim) {
  return gaussian(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0));
}

DensityModel DensityModel::uniform_box(std::vector<double> lo, std::vector<double> hi) {
  require_dim(lo.size(), hi.size(), "uniform box");
  for (std::size_t k = 0; k < lo.size(); ++k)
    if (!(hi[k] > lo[k]) || !std::isfinite(lo[k]) || !std::isfinite(hi[k]))
      throw UsageError("uniform box needs lo < hi on every axis");
  const auto d = lo.size();
  return DensityModel(d, UniformBox{std::move(lo), std::move(hi)});
}

DensityModel DensityModel::mixture(std::vector<DensityModel> components, std::vector<double> weights) {
  if (components.empty() || components.size() != weights.size())
    throw UsageError("mixture needs one weight per component");
  const std::size_t d = components.front().dim();
  double total = 0.0;
  for (std::size_t c = 0; c < components.size(); ++c) {
    require_dim(components[c].dim(), d, "mixture");
    if (!(weights[c] > 0.0) || !std::isfinite(weights[c])) throw UsageError("mixture weights must be positive");
    total += weights[c];
  }
  for (double& w : weights) w /= total;
  return DensityModel(d, Mixture{std::move(components), std::move(weights)});
}

double DensityModel::pdf(std::span<const double> z) const {
  if (z.size() != dim_) throw UsageError("density evaluated at a point of the wrong dimension");
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) {
            double q = 0.0;
            double log_norm = 0.0;
            for (std::size_t k = 0; k < dim_; ++k) {
              const double r = z[k] - g.mean[k];
              q += r * r / g.variance[k];
              log_norm += std::log(2.0 * std::numbers::pi * g.variance[k]);
            }
            return std::exp(-0.5 * (q + log_norm));
          },
          [&](const UniformBox& u) {
            double vol = 1.0;
            for (std::size_t k = 0; k < dim_; ++k) {
              if (z[k] < u.lo[k] || z[k] > u.hi[k]) return 0.0;
              vol *= u.hi[k] - u.lo[k];
            }
            return 1.0 / vol;
          },
          [&](const Mixture& mix) {
            double s = 0.0;
            for (std::size_t c = 0; c < mix.components.size(); ++c) s += mix.weights[c] * mix.components[c].pdf(z);
            return s;
          },
      },
      kind_);
}

void DensityModel::sample(Rng& rng, std::span<double> out) const {
  if (out.size() != dim_) throw UsageError("sample buffer has the wrong dimension");
  std::visit(Overloaded{
                 [&](const Gaussian& g) {
                   std::normal_distribution<double> normal(0.0, 1.0);
                   for (std::size_t k = 0; k < dim_; ++k) out[k] = g.mean[k] + std::sqrt(g.variance[k]) * normal(rng);
                 },
                 [&](const UniformBox& u) {
                   std::uniform_real_distribution<double> unif(0.0, 1.0);
                   for (std::size_t k = 0; k < dim_; ++k) out[k] = u.lo[k] + (u.hi[k] - u.lo[k]) * unif(rng);
                 },
                 [&](const Mixture& mix) {
                   std::discrete_distribution<std::size_t> pick(mix.weights.begin(), mix.weights.end());
                   mix.components[pick(rng)].sample(rng, out);
                 },
             },
             kind_);
}

std::vector<double> DensityModel::sample(Rng& rng, std::size_t count) const {
  std::vector<double> out(count * dim_);
  for (std::size_t i = 0; i < count; ++i) sample(rng, std::span<double>(out.data() + i * dim_, dim_));
  return out;
}

bool DensityModel::compact_support() const {
  return std::visit(Overloaded{
                        [](const Gaussian&) { return false; },
                        [](const UniformBox&) { return true; },
                        [](const Mixture& mix) {
                          return std::all_of(mix.components.begin(), mix.components.end(),
                                             [](const DensityModel& c) { return c.compact_support(); });
                        },
                    },
                    kind_);
}

Box DensityModel::covering_box(double tail_mass) const {
  if (!(tail_mass > 0.0 && tail_mass < 1.0)) throw UsageError("tail mass must be in (0, 1)");
  return std::visit(
      Overloaded{
          [&](const Gaussian& g) {
            // Per-axis two-sided tail of tail_mass / d; union bound over axes.
            const double z = std::sqrt(2.0) * boost::math::erfc_inv(tail_mass / static_cast<double>(dim_));
            Box box{g.mean, g.mean};
            for (std::size_t k = 0; k < dim_; ++k) {
              const double s = std::sqrt(g.variance[k]);
              box.lo[k] -= z * s;
              box.hi[k] += z * s;
            }
            return box;
          },
          [&](const UniformBox& u) { return Box{u.lo, u.hi}; },
          [&](const Mixture& mix) {
            Box box = mix.components.front().covering_box(tail_mass);
            for (std::size_t c = 1; c < mix.components.size(); ++c) {
              const Box b = mix.components[c].covering_box(tail_mass);
              for (std::size_t k = 0; k < dim_; ++k) {
                box.lo[k] = std::min(box.lo[k], b.lo[k]);
                box.hi[k] = std::max(box.hi[k], b.hi[k]);
              }
            }
            return box;
          },
      },
      kind_);
}

void DensityModel::axis_breakpoints(std::size_t axis, std::vector<double>& out) const {
  std::visit(Overloaded{
                 [&](const Gaussian& g) { out.push_back(g.mean[axis]); },
                 [&](const UniformBox& u) {
                   out.push_back(u.lo[axis]);
                   out.push_back(u.hi[axis]);
                 },
                 [&](const Mixture& mix) {
                   for (const auto& c : mix.components) c.axis_breakpoints(axis, out);
                 },
             },
             kind_);
}

std::string DensityModel::describe() const {
  return std::visit(Overloaded{
                        [](const Gaussian& g) {
                          return "gauss:mu=" + join(g.mean) + ";var=" + join(g.variance);
                        },
                        [](const UniformBox& u) { return "uniform:lo=" + join(u.lo) + ";hi=" + join(u.hi); },
                        [](const Mixture& mix) {
                          std::ostringstream os;
                          os.precision(17);
                          os << "mix:";
                          for (std::size_t c = 0; c < mix.components.size(); ++c)
                            os << (c ? "|" : "") << mix.weights[c] << '*' << mix.components[c].describe();
                          return os.str();
                        },
                    },
                    kind_);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(std::string_view s, std::string_view context) {
  s = trim(s);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("invalid number '" + std::string(s) + "' in model spec '" + std::string(context) + "'");
  return v;
}

std::vector<double> to_vector(std::string_view s, std::string_view context) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(to_double(s.substr(start, pos == std::string_view::npos ? pos : pos - start), context));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::vector<std::pair<std::string_view, std::string_view>> key_values(std::string_view body,
                                                                       std::string_view context) {
  std::vector<std::pair<std::string_view, std::string_view>> out;
  std::size_t start = 0;
  while (start <= body.size()) {
    const auto pos = body.find(';', start);
    auto item = trim(body.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (!item.empty()) {
      const auto eq = item.find('=');
      if (eq == std::string_view::npos)
        throw ParseError("expected key=value in model spec '" + std::string(context) + "'");
      out.emplace_back(trim(item.substr(0, eq)), item.substr(eq + 1));
    }
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

DensityModel parse_density(std::string_view spec) {
  const std::string_view context = spec;
  spec = trim(spec);
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw ParseError("model spec must start with gauss:, uniform: or mix: ('" + std::string(context) + "')");
  const auto family = trim(spec.substr(0, colon));
  const auto body = spec.substr(colon + 1);
  try {
    if (family == "gauss" || family == "gaussian") {
      std::vector<double> mu;
      std::vector<double> var;
      for (auto [key, value] : key_values(body, context)) {
        if (key == "mu" || key == "mean") {
          mu = to_vector(value, context);
        } else if (key == "sigma") {
          var = to_vector(value, context);
          for (double& s : var) s *= s;
        } else if (key == "var") {
          var = to_vector(value, context);
        } else {
          throw ParseError("unknown gaussian key '" + std::string(key) + "'");
        }
      }
      if (mu.empty()) throw ParseError("gaussian spec needs mu=");
      if (var.empty()) var.assign(mu.size(), 1.0);
      if (var.size() == 1 && mu.size() > 1) var.assign(mu.size(), var.front());
      return DensityModel::gaussian(std::move(mu), std::move(var));
    }
    if (family == "uniform") {
      std::vector<double> lo;
      std::vector<double> hi;
      for (auto [key, value] : key_values(body, context)) {
        if (key == "lo")
          lo = to_vector(value, context);
        else if (key == "hi")
          hi = to_vector(value, context);
        else
          throw ParseError("unknown uniform key '" + std::string(key) + "'");
      }
      return DensityModel::uniform_box(std::move(lo), std::move(hi));
    }
    if (family == "mix" || family == "mixture") {
      std::vector<DensityModel> comps;
      std::vector<double> weights;
      std::size_t start = 0;
      while (start <= body.size()) {
        const auto pos = body.find('|', start);
        const auto item = trim(body.substr(start, pos == std::string_view::npos ? pos : pos - start));
        const auto star = item.find('*');
        if (star == std::string_view::npos) throw ParseError("mixture component must be weight*model");
        weights.push_back(to_double(item.substr(0, star), context));
        comps.push_back(parse_density(item.substr(star + 1)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
      }
      return DensityModel::mixture(std::move(comps), std::move(weights));
    }
  } catch (const UsageError& e) {
    throw ParseError(std::string(e.what()) + " ('" + std::string(context) + "')");
  }
  throw ParseError("unknown model family '" + std::string(family) + "'");
}

}  // namespace crossmatch
