#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace crossmatch {

enum class Sample : std::uint8_t { First = 0, Second = 1 };

/// Combined two-sample point set. Points are stored row-major; the first
/// m points belong to the FIRST sample (X) and the remaining n to the
/// SECOND sample (Y). Immutable after construction.
class PointCloud {
 public:
  /// Builds the combined sample Z = (X_1..X_m, Y_1..Y_n).
  static PointCloud from_samples(std::size_t dim, std::span<const double> first,
                                 std::span<const double> second);

  /// Builds from points with arbitrary labels; points are reordered stably
  /// so that FIRST precede SECOND. `order` (if given) receives the original
  /// row of each stored point.
  static PointCloud from_labeled(std::size_t dim, std::span<const double> coords,
                                 std::span<const Sample> labels,
                                 std::vector<std::size_t>* order = nullptr);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return m_ + n_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t n() const noexcept { return n_; }

  Sample label(std::size_t i) const noexcept { return i < m_ ? Sample::First : Sample::Second; }
  std::span<const double> point(std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  std::span<const double> coords() const noexcept { return coords_; }

  /// Euclidean distance between points i and j. Throws UsageError on a bad index.
  double distance(std::size_t i, std::size_t j) const;

  /// Same as distance() without bounds checks.
  double distance_unchecked(std::size_t i, std::size_t j) const noexcept;

  /// Throws UsageError unless m >= 1 and n >= 1.
  void require_two_samples() const;

 private:
  PointCloud(std::size_t dim, std::vector<double> coords, std::size_t m, std::size_t n);

  std::size_t dim_ = 1;
  std::size_t m_ = 0;
  std::size_t n_ = 0;
  std::vector<double> coords_;
};

/// Edge cost λ applied to a Euclidean length b.
class CostFunction {
 public:
  struct Power {
    double alpha;
  };
  struct CappedPower {
    double alpha;
    double cap;
  };

  static CostFunction euclidean() { return power(1.0); }
  static CostFunction power(double alpha);
  static CostFunction capped_power(double alpha, double cap);

  double operator()(double b) const;
  double alpha() const noexcept;
  std::optional<double> cap() const noexcept;
  bool is_euclidean() const noexcept;

  /// Non-empty when α is outside (0, d): the statistic is still computable
  /// but the locality guarantee for optimal matchings no longer applies.
  std::optional<std::string> validity_warning(std::size_t dim) const;

  std::string describe() const;

 private:
  explicit CostFunction(std::variant<Power, CappedPower> kind) : kind_(kind) {}
  std::variant<Power, CappedPower> kind_;
};

/// Pairwise Euclidean distances, either cached as a dense t×t matrix
/// or computed on demand for large clouds.
class DistanceTable {
 public:
  static constexpr std::size_t kDenseLimit = 4096;

  explicit DistanceTable(const PointCloud& cloud, std::optional<bool> dense = std::nullopt);

  double operator()(std::size_t i, std::size_t j) const noexcept {
    return dense_ ? matrix_[i * t_ + j] : cloud_->distance_unchecked(i, j);
  }
  std::size_t size() const noexcept { return t_; }
  bool dense() const noexcept { return dense_; }

 private:
  const PointCloud* cloud_;
  std::size_t t_;
  bool dense_;
  std::vector<double> matrix_;
};

/// Reads `x1..xd,label` CSV with a header row; label 0 = FIRST, 1 = SECOND.
/// `order` (optional) maps each stored point back to its 0-based data row.
PointCloud read_csv(std::istream& in, std::vector<std::size_t>* order = nullptr);
PointCloud read_csv_file(const std::string& path, std::vector<std::size_t>* order = nullptr);
void write_csv(std::ostream& out, const PointCloud& cloud);

}  // namespace crossmatch
