#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "crossmatch/crossmatch.hpp"

using namespace crossmatch;
using nlohmann::json;

namespace {

// Exit codes.
constexpr int kUsage = 2;
constexpr int kUnsupported = 3;
constexpr int kParse = 4;
constexpr int kNumerical = 5;
constexpr int kFailure = 1;

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  out << text;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

CostFunction make_cost(double alpha, const std::optional<double>& cap) {
  return cap ? CostFunction::capped_power(alpha, *cap) : CostFunction::power(alpha);
}

SolverKind parse_solver(const std::string& s) { return s == "greedy" ? SolverKind::Greedy : SolverKind::Exact; }

Matching run_solver(const PointCloud& cloud, const CostFunction& cf, SolverKind solver, TieSeed seed) {
  return solver == SolverKind::Greedy ? solve_greedy(cloud, cf, seed) : solve_exact(cloud, cf, seed);
}

SampleGraph build_graph(const std::string& kind, std::size_t k, const PointCloud& cloud, const CostFunction& cf,
                        SolverKind solver, TieSeed seed) {
  if (kind == "knn") return build_knn(cloud, k);
  if (kind == "mst") return build_mst(cloud);
  return matching_to_graph(run_solver(cloud, cf, solver, seed));
}

json cloud_info(const PointCloud& cloud) {
  return {{"t", cloud.size()}, {"m", cloud.m()}, {"n", cloud.n()}, {"d", cloud.dim()}};
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError("bad number '" + item + "' in --a-grid");
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--a-grid must list at least one value");
  return out;
}

int run_match(const std::string& input, const std::string& solver_name, double alpha, const std::optional<double>& cap,
              const std::optional<std::uint64_t>& seed, const std::string& output) {
  std::vector<std::size_t> order;
  const auto cloud = read_csv_file(input, &order);
  const auto cf = make_cost(alpha, cap);
  if (auto w = cf.validity_warning(cloud.dim())) warn(*w);
  const auto matching = run_solver(cloud, cf, parse_solver(solver_name), seed);

  // Report rows of the input file, 1-based.
  json pairs = json::array();
  std::vector<std::pair<std::size_t, std::size_t>> rows;
  for (auto [i, j] : matching.pairs()) rows.emplace_back(std::min(order[i], order[j]) + 1, std::max(order[i], order[j]) + 1);
  std::sort(rows.begin(), rows.end());
  for (auto [a, b] : rows) pairs.push_back({a, b});
  json j = cloud_info(cloud);
  j["solver"] = std::string(to_string(matching.solver()));
  j["cost"] = cf.describe();
  j["pairs"] = std::move(pairs);
  j["fixed_point"] = matching.fixed_point() ? json(order[*matching.fixed_point()] + 1) : json(nullptr);
  j["total_cost"] = matching.total_cost();
  emit(output, j.dump(2) + "\n");
  return 0;
}

int run_diagnose(const std::string& input, const std::string& graph, std::size_t k, const std::string& grid_text,
                 const std::string& solver_name, const std::string& output) {
  const auto cloud = read_csv_file(input);
  const auto grid = parse_grid(grid_text);
  const auto cf = CostFunction::euclidean();
  const auto g = build_graph(graph, k, cloud, cf, parse_solver(solver_name), std::nullopt);
  const auto deg = diag_max_degree(g);
  json j = cloud_info(cloud);
  j["graph"] = g.construction().describe();
  j["edges"] = g.edge_count();
  j["max_out_degree"] = deg.max_out;
  j["max_in_degree"] = deg.max_in;
  j["mean_out_degree"] = diag_mean_out_degree(g);
  j["length_scale"] = std::pow(static_cast<double>(cloud.size()), -1.0 / static_cast<double>(cloud.dim()));
  j["a_grid"] = grid;
  j["long_edge_fraction"] = diag_long_edge_fractions(g, cloud, grid);
  emit(output, j.dump(2) + "\n");
  return 0;
}

int run_null(std::size_t m, std::size_t n, const std::string& format) {
  const auto dist = null_pmf(m, n);
  const auto mom = null_moments(m, n);
  if (format == "csv") {
    std::ostringstream os;
    os.precision(17);
    os << "cross_pairs,chi,pmf\n";
    for (std::size_t i = 0; i < dist.support.size(); ++i)
      os << dist.support[i] << ',' << 2 * dist.support[i] << ',' << dist.pmf[i] << '\n';
    std::cout << os.str();
    std::cerr << "mean " << mom.mean << ", variance " << mom.variance << " (chi)\n";
    return 0;
  }
  json j{{"m", m}, {"n", n}, {"support", dist.support}, {"pmf", dist.pmf}, {"mean", mom.mean}, {"variance", mom.variance}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int run_test(const std::string& input, const std::string& graph, std::size_t k, const std::string& calibration,
             std::size_t permutations, std::uint64_t seed, const std::string& solver_name, double alpha,
             const std::optional<double>& cap, const std::string& output) {
  const auto cloud = read_csv_file(input);
  cloud.require_two_samples();
  const auto cf = make_cost(alpha, cap);
  const auto g = build_graph(graph, k, cloud, cf, parse_solver(solver_name), seed);
  const auto cc = cross_count(g, cloud);
  json j = cloud_info(cloud);
  j["graph"] = g.construction().describe();
  j["chi"] = cc.chi;
  j["cross_pairs"] = cc.cross_pairs ? json(*cc.cross_pairs) : json(nullptr);
  j["calibration"] = calibration;
  if (calibration == "exact") {
    j["pvalue"] = pvalue_exact(cc);
    const auto mom = null_moments(cloud.m(), cloud.n());
    j["null_mean"] = mom.mean;
    j["null_variance"] = mom.variance;
  } else {
    j["pvalue"] = pvalue_permutation(g, cloud, permutations, seed);
    j["permutations"] = permutations;
  }
  j["seed"] = seed;
  emit(output, j.dump(2) + "\n");
  return 0;
}

int run_limit(const std::string& f_spec, const std::string& g_spec, double p, double delta, const std::string& method,
              std::size_t samples, std::uint64_t seed, const std::string& output) {
  const auto f = parse_density(f_spec);
  const auto g = parse_density(g_spec);
  std::optional<LimitMethod> chosen;
  if (method == "quad") chosen = LimitMethod::Quadrature;
  if (method == "mc") chosen = LimitMethod::MonteCarlo;
  LimitOptions opt;
  opt.mc_samples = samples;
  opt.seed = seed;
  const auto est = limit_integral(f, g, p, delta, chosen, opt);
  json j{{"f", f.describe()},
         {"g", g.describe()},
         {"p", p},
         {"delta", delta},
         {"method", std::string(to_string(est.method))},
         {"value", est.value},
         {"error_estimate", est.error_estimate},
         {"evaluations", est.evaluations},
         {"null_value", 2.0 * delta * p * (1.0 - p)}};
  if (delta != 1.0) warn("delta other than 1 is experimental");
  emit(output, j.dump(2) + "\n");
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_dir) {
  std::ifstream in(config_path);
  if (!in) throw ParseError("cannot open '" + config_path + "'");
  std::stringstream text;
  text << in.rdbuf();
  std::string experiment = "convergence";
  try {
    const auto raw = json::parse(text.str());
    if (raw.is_object() && raw.contains("experiment")) experiment = raw.at("experiment").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid config JSON: ") + e.what());
  }
  if (experiment != "convergence" && experiment != "greedy_scaling")
    throw ParseError("experiment must be convergence or greedy_scaling");
  std::istringstream cfg_in(text.str());
  auto config = load_config(cfg_in);
  if (experiment == "greedy_scaling") {
    config.solver = SolverKind::Greedy;
    config.graph = {GraphKind::Matching, 0};
    config.record_greedy_length = true;
  }

  const auto report = run_convergence(config);
  std::optional<GreedyScaling> scaling;
  if (experiment == "greedy_scaling") scaling = run_greedy_scaling(config);
  for (const auto& w : report.warnings) warn(w);
  if (scaling)
    for (const auto& w : scaling->warnings) warn(w);

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(std::filesystem::path(out_dir) / "report.csv");
  std::ofstream summary(std::filesystem::path(out_dir) / "summary.json");
  if (!csv || !summary) throw UsageError("cannot write into '" + out_dir + "'");
  write_report_csv(csv, report);
  write_summary_json(summary, report, scaling);
  std::cerr << "wrote " << report.records.size() << " records to " << out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cross-match two-sample test"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "0.1.0");

  std::string input;
  std::string output = "-";
  std::string solver = "exact";
  double alpha = 1.0;
  std::optional<double> cap;
  std::optional<std::uint64_t> tie_seed;

  auto* match = app.add_subcommand("match", "minimum-cost non-bipartite matching of a labelled CSV");
  match->add_option("--input", input, "CSV with columns x1..xd,label")->required()->check(CLI::ExistingFile);
  match->add_option("--solver", solver)->check(CLI::IsMember({"exact", "greedy"}));
  match->add_option("--alpha", alpha, "cost exponent")->check(CLI::PositiveNumber);
  match->add_option("--cap", cap, "cost cap");
  match->add_option("--seed", tie_seed, "tie-break seed");
  match->add_option("--output", output, "JSON output path (- for stdout)");

  std::string graph = "matching";
  std::size_t k = 1;
  std::string a_grid = "0.5,1,2,5,10";
  auto* diagnose = app.add_subcommand("diagnose", "degree and long-edge diagnostics of a sample graph");
  diagnose->add_option("--input", input)->required()->check(CLI::ExistingFile);
  diagnose->add_option("--graph", graph)->check(CLI::IsMember({"matching", "knn", "mst"}));
  diagnose->add_option("--k", k, "neighbours for knn");
  diagnose->add_option("--a-grid", a_grid, "comma-separated scales a");
  diagnose->add_option("--solver", solver)->check(CLI::IsMember({"exact", "greedy"}));
  diagnose->add_option("--output", output);

  std::size_t m = 0;
  std::size_t n = 0;
  std::string format = "json";
  auto* null_cmd = app.add_subcommand("null", "exact null law of the cross-match count");
  null_cmd->add_option("--m", m)->required();
  null_cmd->add_option("--n", n)->required();
  null_cmd->add_option("--output", format, "json or csv, written to stdout")->check(CLI::IsMember({"json", "csv"}));

  std::string calibration = "exact";
  std::size_t permutations = 10000;
  std::uint64_t seed = 1;
  auto* test = app.add_subcommand("test", "cross-count statistic and p-value for a labelled CSV");
  test->add_option("--input", input)->required()->check(CLI::ExistingFile);
  test->add_option("--graph", graph)->check(CLI::IsMember({"matching", "knn", "mst"}));
  test->add_option("--k", k);
  test->add_option("--calibration", calibration)->check(CLI::IsMember({"exact", "permutation"}));
  test->add_option("--permutations", permutations);
  test->add_option("--seed", seed);
  test->add_option("--solver", solver)->check(CLI::IsMember({"exact", "greedy"}));
  test->add_option("--alpha", alpha)->check(CLI::PositiveNumber);
  test->add_option("--cap", cap);
  test->add_option("--output", output);

  std::string f_spec;
  std::string g_spec;
  double p = 0.5;
  double delta = 1.0;
  std::string method = "auto";
  std::size_t samples = 1'000'000;
  auto* limit = app.add_subcommand("limit", "almost-sure limit of chi/t for two density models");
  limit->add_option("--f", f_spec, "model spec, e.g. gauss:mu=0,0;sigma=1,1")->required();
  limit->add_option("--g", g_spec)->required();
  limit->add_option("--p", p);
  limit->add_option("--delta", delta);
  limit->add_option("--method", method)->check(CLI::IsMember({"auto", "quad", "mc"}));
  limit->add_option("--samples", samples, "Monte Carlo sample count");
  limit->add_option("--seed", seed);
  limit->add_option("--output", output);

  std::string config;
  std::string out_dir = ".";
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo experiment from a JSON config");
  simulate->add_option("--config", config)->required()->check(CLI::ExistingFile);
  simulate->add_option("--output-dir", out_dir);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*match) return run_match(input, solver, alpha, cap, tie_seed, output);
    if (*diagnose) return run_diagnose(input, graph, k, a_grid, solver, output);
    if (*null_cmd) return run_null(m, n, format);
    if (*test)
      return run_test(input, graph, k, calibration, permutations, seed, solver, alpha, cap, output);
    if (*limit) return run_limit(f_spec, g_spec, p, delta, method, samples, seed, output);
    if (*simulate) return run_simulate(config, out_dir);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const UnsupportedError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnsupported;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kParse;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
