#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "crossmatch/asymptotics.hpp"
#include "crossmatch/density.hpp"
#include "crossmatch/geometry.hpp"
#include "crossmatch/graphs.hpp"
#include "crossmatch/matching.hpp"

namespace crossmatch {

/// Largest t run with the exact solver; larger t fall back to greedy.
inline constexpr std::size_t kExactSolverCap = 1600;

struct ExperimentConfig {
  DensityModel f = DensityModel::standard_gaussian(2);
  DensityModel g = DensityModel::standard_gaussian(2);
  double p = 0.5;
  std::vector<std::size_t> t_grid{100, 200, 400, 800, 1600};
  std::size_t replicates = 1;
  SolverKind solver = SolverKind::Exact;
  GraphConstruction graph{GraphKind::Matching, 0};
  double alpha = 1.0;
  std::optional<double> cap;
  std::uint64_t seed = 1;

  /// Long-edge diagnostic scales a (edges longer than a·t^(-1/d)).
  std::vector<double> a_grid{0.5, 1.0, 2.0, 5.0, 10.0};
  /// Level of the exact-null test whose rejections are recorded.
  double level = 0.05;
  /// η_t = eta_c · t^(-eta_gamma) for the threshold test.
  double eta_c = 1.0;
  double eta_gamma = 0.25;
  /// Also run the greedy solver on every replicate to record its length.
  bool record_greedy_length = false;
  /// Evaluate the limit oracle for the summary.
  bool with_oracle = true;
  /// 0 = one worker per hardware thread.
  std::size_t workers = 0;

  CostFunction cost() const;
  std::size_t first_count(std::size_t t) const;
  /// Throws UsageError on an invalid configuration.
  void validate() const;
};

struct ReplicateRecord {
  std::size_t t = 0;
  std::size_t replicate = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t chi = 0;
  double chi_over_t = 0.0;
  std::optional<std::size_t> cross_pairs;
  std::optional<double> matching_cost;
  std::optional<double> matching_length;
  std::optional<double> greedy_length;
  std::optional<double> pvalue;
  bool reject_exact = false;
  bool reject_eta = false;
  double eta = 0.0;
  double mean_out_degree = 0.0;
  std::size_t max_out_degree = 0;
  std::size_t max_in_degree = 0;
  std::vector<double> long_edge_fraction;  // aligned with a_grid
};

struct TSummary {
  std::size_t t = 0;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t replicates = 0;
  double mean_chi = 0.0;
  double var_chi = 0.0;
  double mean_chi_over_t = 0.0;
  double sd_chi_over_t = 0.0;
  double se_chi_over_t = 0.0;
  double null_mean_chi = 0.0;
  std::optional<double> null_var_chi;
  std::optional<double> gap;  // mean chi/t minus oracle limit
  std::optional<double> power_exact;
  double power_eta = 0.0;
  double eta = 0.0;
  std::optional<double> mean_greedy_length;
  std::optional<double> mean_matching_length;
  std::vector<double> mean_long_edge_fraction;
};

struct ExperimentReport {
  std::string f;
  std::string g;
  double p = 0.0;
  std::string graph;
  std::string solver;
  std::string cost;
  std::uint64_t seed = 0;
  std::vector<double> a_grid;
  std::vector<ReplicateRecord> records;  // t-major, then replicate
  std::vector<TSummary> summaries;       // one per t in t_grid
  std::optional<LimitEstimate> oracle;
  std::vector<std::string> warnings;
};

/// Draws one combined sample of size t (m_t from f, n_t from g) for the
/// given replicate; the same (config.seed, t, replicate) gives the same cloud.
PointCloud draw_sample(const ExperimentConfig& config, std::size_t t, std::size_t replicate);

/// Monte Carlo over the t grid: builds the configured graph for every
/// replicate and records chi/t, p-values, test decisions and diagnostics.
/// Solver failures are rethrown with (t, replicate, seed) context.
ExperimentReport run_convergence(const ExperimentConfig& config);

struct GreedyScaling {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<std::size_t> t;
  std::vector<double> mean_length;
  std::vector<std::string> warnings;
};

/// Log-log least-squares slope of the mean greedy total Euclidean length
/// against t. Needs at least two distinct t values (UsageError otherwise);
/// non-compact models are run but flagged in `warnings`.
GreedyScaling run_greedy_scaling(const ExperimentConfig& config);

struct PowerPoint {
  std::size_t t = 0;
  double power_exact = 0.0;
  double power_eta = 0.0;
  double se_exact = 0.0;
  double se_eta = 0.0;
};

/// Rejection frequency per t of the exact-null level test and of the
/// η_t threshold test. `level` must lie in (0, 1].
std::vector<PowerPoint> run_power_curve(const ExperimentConfig& config, double level);

/// Reads an ExperimentConfig from JSON (see README for the keys).
ExperimentConfig load_config(std::istream& in);
ExperimentConfig load_config_file(const std::string& path);

/// Tidy long format: t,replicate,metric,value.
void write_report_csv(std::ostream& out, const ExperimentReport& report);
void write_summary_json(std::ostream& out, const ExperimentReport& report,
                        const std::optional<GreedyScaling>& scaling = std::nullopt);

}  // namespace crossmatch
