#include "crossmatch/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "crossmatch/error.hpp"

namespace crossmatch {

PointCloud::PointCloud(std::size_t dim, std::vector<double> coords, std::size_t m, std::size_t n)
    : dim_(dim), m_(m), n_(n), coords_(std::move(coords)) {}

PointCloud PointCloud::from_samples(std::size_t dim, std::span<const double> first,
                                    std::span<const double> second) {
  if (dim == 0) throw UsageError("point dimension must be at least 1");
  if (first.size() % dim != 0 || second.size() % dim != 0)
    throw UsageError("coordinate count is not a multiple of the dimension");
  for (double v : first)
    if (!std::isfinite(v)) throw UsageError("non-finite coordinate");
  for (double v : second)
    if (!std::isfinite(v)) throw UsageError("non-finite coordinate");
  std::vector<double> coords;
  coords.reserve(first.size() + second.size());
  coords.insert(coords.end(), first.begin(), first.end());
  coords.insert(coords.end(), second.begin(), second.end());
  return PointCloud(dim, std::move(coords), first.size() / dim, second.size() / dim);
}

PointCloud PointCloud::from_labeled(std::size_t dim, std::span<const double> coords,
                                    std::span<const Sample> labels,
                                    std::vector<std::size_t>* order) {
  if (dim == 0) throw UsageError("point dimension must be at least 1");
  if (coords.size() != labels.size() * dim)
    throw UsageError("coordinate count does not match labels × dimension");
  std::vector<double> first;
  std::vector<double> second;
  std::vector<std::size_t> first_rows;
  std::vector<std::size_t> second_rows;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto row = coords.subspan(i * dim, dim);
    if (labels[i] == Sample::First) {
      first.insert(first.end(), row.begin(), row.end());
      first_rows.push_back(i);
    } else {
      second.insert(second.end(), row.begin(), row.end());
      second_rows.push_back(i);
    }
  }
  if (order) {
    *order = std::move(first_rows);
    order->insert(order->end(), second_rows.begin(), second_rows.end());
  }
  return from_samples(dim, first, second);
}

double PointCloud::distance_unchecked(std::size_t i, std::size_t j) const noexcept {
  const double* a = coords_.data() + i * dim_;
  const double* b = coords_.data() + j * dim_;
  double s = 0.0;
  for (std::size_t k = 0; k < dim_; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double PointCloud::distance(std::size_t i, std::size_t j) const {
  if (i >= size() || j >= size())
    throw UsageError("point index out of range: " + std::to_string(std::max(i, j)) +
                     " >= " + std::to_string(size()));
  return distance_unchecked(i, j);
}

void PointCloud::require_two_samples() const {
  if (m_ == 0 || n_ == 0)
    throw UsageError("both samples must be non-empty (m = " + std::to_string(m_) +
                     ", n = " + std::to_string(n_) + ")");
}

CostFunction CostFunction::power(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw UsageError("cost exponent must be positive");
  return CostFunction(Power{alpha});
}

CostFunction CostFunction::capped_power(double alpha, double cap) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw UsageError("cost exponent must be positive");
  if (!(cap > 0.0)) throw UsageError("cost cap must be positive");
  return CostFunction(CappedPower{alpha, cap});
}

double CostFunction::operator()(double b) const {
  if (!(b >= 0.0)) throw UsageError("edge length must be non-negative");
  return std::visit(
      [b](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        const double v = k.alpha == 1.0 ? b : std::pow(b, k.alpha);
        if constexpr (std::is_same_v<K, CappedPower>) return std::min(v, k.cap);
        return v;
      },
      kind_);
}

double CostFunction::alpha() const noexcept {
  return std::visit([](const auto& k) { return k.alpha; }, kind_);
}

std::optional<double> CostFunction::cap() const noexcept {
  if (auto* c = std::get_if<CappedPower>(&kind_)) return c->cap;
  return std::nullopt;
}

bool CostFunction::is_euclidean() const noexcept {
  auto* p = std::get_if<Power>(&kind_);
  return p && p->alpha == 1.0;
}

std::optional<std::string> CostFunction::validity_warning(std::size_t dim) const {
  const double a = alpha();
  if (a < static_cast<double>(dim)) return std::nullopt;
  std::ostringstream os;
  os << "cost exponent alpha = " << a << " is not in (0, d) for d = " << dim
     << "; the statistic is computed but its consistency guarantee does not apply";
  return os.str();
}

std::string CostFunction::describe() const {
  std::ostringstream os;
  if (auto c = cap())
    os << "capped_power(alpha=" << alpha() << ", cap=" << *c << ")";
  else
    os << "power(alpha=" << alpha() << ")";
  return os.str();
}

DistanceTable::DistanceTable(const PointCloud& cloud, std::optional<bool> dense)
    : cloud_(&cloud), t_(cloud.size()), dense_(dense.value_or(cloud.size() <= kDenseLimit)) {
  if (!dense_) return;
  matrix_.assign(t_ * t_, 0.0);
  for (std::size_t i = 0; i < t_; ++i)
    for (std::size_t j = i + 1; j < t_; ++j)
      matrix_[i * t_ + j] = matrix_[j * t_ + i] = cloud.distance_unchecked(i, j);
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.remove_suffix(1);
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError("line " + std::to_string(line_no) + ": invalid number '" + std::string(s) + "'");
  return v;
}

}  // namespace

PointCloud read_csv(std::istream& in, std::vector<std::size_t>* order) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto header = split_fields(line);
    if (header.size() < 2 || header.back() != "label")
      throw ParseError("header must be x1..xd,label");
    dim = header.size() - 1;
    for (std::size_t k = 0; k < dim; ++k)
      if (header[k] != "x" + std::to_string(k + 1))
        throw ParseError("header column " + std::to_string(k + 1) + " must be x" + std::to_string(k + 1));
    break;
  }
  if (dim == 0) throw ParseError("empty CSV: header row required");

  std::vector<double> coords;
  std::vector<Sample> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_fields(line);
    if (fields.size() != dim + 1)
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim + 1) +
                       " fields, got " + std::to_string(fields.size()));
    for (std::size_t k = 0; k < dim; ++k) coords.push_back(parse_double(fields[k], line_no));
    if (fields[dim] == "0")
      labels.push_back(Sample::First);
    else if (fields[dim] == "1")
      labels.push_back(Sample::Second);
    else
      throw ParseError("line " + std::to_string(line_no) + ": label must be 0 or 1");
  }
  return PointCloud::from_labeled(dim, coords, labels, order);
}

PointCloud read_csv_file(const std::string& path, std::vector<std::size_t>* order) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return read_csv(in, order);
}

void write_csv(std::ostream& out, const PointCloud& cloud) {
  for (std::size_t k = 0; k < cloud.dim(); ++k) out << 'x' << (k + 1) << ',';
  out << "label\n";
  out.precision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (double v : cloud.point(i)) out << v << ',';
    out << (cloud.label(i) == Sample::First ? 0 : 1) << '\n';
  }
}

}  // namespace crossmatch
