#include "crossmatch/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "crossmatch/detail/parallel.hpp"
#include "crossmatch/error.hpp"
#include "crossmatch/nulldist.hpp"
#include "crossmatch/rng.hpp"
#include "crossmatch/statistic.hpp"

namespace crossmatch {

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s / static_cast<double>(v.size() - 1);
}

double euclidean_length(const PointCloud& cloud, const Matching& matching) {
  double total = 0.0;
  for (auto [i, j] : matching.pairs()) total += cloud.distance_unchecked(i, j);
  return total;
}

}  // namespace

CostFunction ExperimentConfig::cost() const {
  return cap ? CostFunction::capped_power(alpha, *cap) : CostFunction::power(alpha);
}

std::size_t ExperimentConfig::first_count(std::size_t t) const {
  return static_cast<std::size_t>(std::llround(p * static_cast<double>(t)));
}

void ExperimentConfig::validate() const {
  if (f.dim() != g.dim()) throw UsageError("f and g must have the same dimension");
  if (!(p > 0.0 && p < 1.0)) throw UsageError("p must lie in (0, 1)");
  if (replicates < 1) throw UsageError("replicates must be at least 1");
  if (t_grid.empty()) throw UsageError("t_grid must not be empty");
  if (!std::is_sorted(t_grid.begin(), t_grid.end())) throw UsageError("t_grid must be sorted ascending");
  for (std::size_t t : t_grid) {
    if (t < 2) throw UsageError("every t in t_grid must be at least 2");
    const std::size_t m = first_count(t);
    if (m == 0 || m == t) throw UsageError("t = " + std::to_string(t) + " leaves one sample empty for this p");
  }
  if (solver == SolverKind::BruteForce) throw UsageError("harness solver must be exact or greedy");
  if (graph.kind == GraphKind::Knn && graph.k == 0) throw UsageError("knn graph needs k >= 1");
  for (double a : a_grid)
    if (!(a > 0.0)) throw UsageError("a_grid entries must be positive");
  if (!(level > 0.0 && level <= 1.0)) throw UsageError("level must lie in (0, 1]");
  (void)cost();
  (void)eta_schedule(2, eta_c, eta_gamma);
}

PointCloud draw_sample(const ExperimentConfig& config, std::size_t t, std::size_t replicate) {
  const std::size_t m = config.first_count(t);
  auto rng = make_rng(config.seed, {0x73616d70ULL, t, replicate});
  const auto first = config.f.sample(rng, m);
  const auto second = config.g.sample(rng, t - m);
  return PointCloud::from_samples(config.f.dim(), first, second);
}

namespace {

ReplicateRecord run_replicate(const ExperimentConfig& config, const CostFunction& cf, std::size_t t,
                              std::size_t replicate) {
  ReplicateRecord rec;
  rec.t = t;
  rec.replicate = replicate;
  rec.seed = derive_seed(config.seed, {0x73616d70ULL, t, replicate});
  const PointCloud cloud = draw_sample(config, t, replicate);
  rec.m = cloud.m();
  rec.n = cloud.n();
  const std::uint64_t tie_seed = derive_seed(config.seed, {0x74696573ULL, t, replicate});

  std::optional<Matching> matching;
  std::optional<Matching> greedy;
  std::optional<SampleGraph> graph;
  switch (config.graph.kind) {
    case GraphKind::Matching: {
      const bool exact = config.solver == SolverKind::Exact && t <= kExactSolverCap;
      matching = exact ? solve_exact(cloud, cf, tie_seed) : solve_greedy(cloud, cf, tie_seed);
      if (!exact) greedy = matching;
      graph = matching_to_graph(*matching);
      break;
    }
    case GraphKind::Knn:
      graph = build_knn(cloud, config.graph.k);
      break;
    case GraphKind::Mst:
      graph = build_mst(cloud);
      break;
  }

  const CrossCount cc = cross_count(*graph, cloud);
  rec.chi = cc.chi;
  rec.chi_over_t = static_cast<double>(cc.chi) / static_cast<double>(t);
  rec.cross_pairs = cc.cross_pairs;
  if (matching) {
    rec.matching_cost = matching->total_cost();
    rec.matching_length = euclidean_length(cloud, *matching);
  }
  if (config.record_greedy_length) {
    if (!greedy) greedy = solve_greedy(cloud, cf, tie_seed);
    rec.greedy_length = euclidean_length(cloud, *greedy);
  }
  if (cc.cross_pairs && t % 2 == 0) {
    rec.pvalue = pvalue_exact(cc);
    rec.reject_exact = *rec.pvalue <= config.level;
  }
  rec.eta = eta_schedule(t, config.eta_c, config.eta_gamma);
  rec.reject_eta = asymptotic_test(cc, rec.eta) == Decision::Reject;

  const auto deg = diag_max_degree(*graph);
  rec.max_out_degree = deg.max_out;
  rec.max_in_degree = deg.max_in;
  rec.mean_out_degree = diag_mean_out_degree(*graph);
  rec.long_edge_fraction = diag_long_edge_fractions(*graph, cloud, config.a_grid);
  return rec;
}

std::vector<ReplicateRecord> run_records(const ExperimentConfig& config) {
  const CostFunction cf = config.cost();
  const std::size_t per_t = config.replicates;
  std::vector<ReplicateRecord> records(config.t_grid.size() * per_t);
  // Largest t first so the slowest tasks start early.
  std::vector<std::size_t> schedule(records.size());
  std::iota(schedule.begin(), schedule.end(), std::size_t{0});
  std::stable_sort(schedule.begin(), schedule.end(),
                   [&](std::size_t a, std::size_t b) { return config.t_grid[a / per_t] > config.t_grid[b / per_t]; });
  detail::parallel_for(
      records.size(),
      [&](std::size_t task) {
        const std::size_t slot = schedule[task];
        const std::size_t t = config.t_grid[slot / per_t];
        const std::size_t rep = slot % per_t;
        try {
          records[slot] = run_replicate(config, cf, t, rep);
        } catch (const std::exception& e) {
          std::ostringstream os;
          os << "replicate failed (t = " << t << ", replicate = " << rep << ", seed = " << config.seed
             << "): " << e.what();
          throw ExperimentError(os.str());
        }
      },
      config.workers);
  return records;
}

}  // namespace

ExperimentReport run_convergence(const ExperimentConfig& config) {
  config.validate();
  ExperimentReport report;
  report.f = config.f.describe();
  report.g = config.g.describe();
  report.p = config.p;
  report.graph = config.graph.describe();
  report.solver = std::string(to_string(config.solver));
  report.cost = config.cost().describe();
  report.seed = config.seed;
  report.a_grid = config.a_grid;

  if (auto w = config.cost().validity_warning(config.f.dim())) report.warnings.push_back(*w);
  if (config.graph.kind == GraphKind::Matching) {
    if (config.solver == SolverKind::Greedy && !(config.f.compact_support() && config.g.compact_support()))
      report.warnings.push_back("greedy matching limit is only guaranteed for compactly supported densities");
    if (config.solver == SolverKind::Exact && config.t_grid.back() > kExactSolverCap)
      report.warnings.push_back("t > " + std::to_string(kExactSolverCap) +
                                " uses the greedy solver instead of the exact one");
  }

  if (config.with_oracle) {
    switch (config.graph.kind) {
      case GraphKind::Matching:
        report.oracle = limit_integral(config.f, config.g, config.p, 1.0);
        break;
      case GraphKind::Knn:
        report.oracle = limit_integral(config.f, config.g, config.p, static_cast<double>(config.graph.k));
        report.warnings.push_back("limit oracle with delta = K for kNN graphs is experimental");
        break;
      case GraphKind::Mst:
        report.warnings.push_back("no limit oracle is defined for MST graphs");
        break;
    }
  }

  report.records = run_records(config);

  const std::size_t per_t = config.replicates;
  for (std::size_t ti = 0; ti < config.t_grid.size(); ++ti) {
    const std::size_t t = config.t_grid[ti];
    TSummary s;
    s.t = t;
    s.m = config.first_count(t);
    s.n = t - s.m;
    s.replicates = per_t;
    std::vector<double> chi;
    std::vector<double> ratio;
    std::vector<double> greedy;
    std::vector<double> length;
    std::vector<double> long_edge(config.a_grid.size(), 0.0);
    std::size_t rej_exact = 0;
    std::size_t rej_eta = 0;
    bool have_pvalues = true;
    for (std::size_t r = 0; r < per_t; ++r) {
      const auto& rec = report.records[ti * per_t + r];
      chi.push_back(static_cast<double>(rec.chi));
      ratio.push_back(rec.chi_over_t);
      if (rec.greedy_length) greedy.push_back(*rec.greedy_length);
      if (rec.matching_length) length.push_back(*rec.matching_length);
      for (std::size_t a = 0; a < long_edge.size(); ++a) long_edge[a] += rec.long_edge_fraction[a];
      if (!rec.pvalue) have_pvalues = false;
      rej_exact += rec.reject_exact ? 1 : 0;
      rej_eta += rec.reject_eta ? 1 : 0;
      s.eta = rec.eta;
    }
    const double reps = static_cast<double>(per_t);
    s.mean_chi = mean_of(chi);
    s.var_chi = variance_of(chi);
    s.mean_chi_over_t = mean_of(ratio);
    s.sd_chi_over_t = std::sqrt(variance_of(ratio));
    s.se_chi_over_t = s.sd_chi_over_t / std::sqrt(reps);
    s.null_mean_chi = null_mean(s.m, s.n);
    if (t >= 4) s.null_var_chi = null_moments(s.m, s.n).variance;
    if (report.oracle) s.gap = s.mean_chi_over_t - report.oracle->value;
    if (have_pvalues) s.power_exact = static_cast<double>(rej_exact) / reps;
    s.power_eta = static_cast<double>(rej_eta) / reps;
    if (!greedy.empty()) s.mean_greedy_length = mean_of(greedy);
    if (!length.empty()) s.mean_matching_length = mean_of(length);
    for (double& v : long_edge) v /= reps;
    s.mean_long_edge_fraction = std::move(long_edge);
    report.summaries.push_back(std::move(s));
  }
  return report;
}

GreedyScaling run_greedy_scaling(const ExperimentConfig& config) {
  config.validate();
  const std::set<std::size_t> distinct(config.t_grid.begin(), config.t_grid.end());
  if (distinct.size() < 2) throw UsageError("greedy scaling slope needs at least two distinct t values");
  GreedyScaling out;
  if (!(config.f.compact_support() && config.g.compact_support()))
    out.warnings.push_back("greedy length rate assumes compactly supported densities");

  const CostFunction euclid = CostFunction::euclidean();
  const std::size_t per_t = config.replicates;
  std::vector<double> lengths(config.t_grid.size() * per_t, 0.0);
  detail::parallel_for(
      lengths.size(),
      [&](std::size_t slot) {
        const std::size_t t = config.t_grid[slot / per_t];
        const std::size_t rep = slot % per_t;
        try {
          const PointCloud cloud = draw_sample(config, t, rep);
          const auto matching = solve_greedy(cloud, euclid, derive_seed(config.seed, {0x74696573ULL, t, rep}));
          lengths[slot] = matching.total_cost();
        } catch (const std::exception& e) {
          std::ostringstream os;
          os << "greedy replicate failed (t = " << t << ", replicate = " << rep << ", seed = " << config.seed
             << "): " << e.what();
          throw ExperimentError(os.str());
        }
      },
      config.workers);

  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t ti = 0; ti < config.t_grid.size(); ++ti) {
    const std::vector<double> chunk(lengths.begin() + static_cast<std::ptrdiff_t>(ti * per_t),
                                    lengths.begin() + static_cast<std::ptrdiff_t>((ti + 1) * per_t));
    const double mean = mean_of(chunk);
    out.t.push_back(config.t_grid[ti]);
    out.mean_length.push_back(mean);
    if (!(mean > 0.0)) throw NumericalError("greedy length is zero; cannot take logarithms");
    xs.push_back(std::log(static_cast<double>(config.t_grid[ti])));
    ys.push_back(std::log(mean));
  }
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  return out;
}

std::vector<PowerPoint> run_power_curve(const ExperimentConfig& config, double level) {
  if (!(level > 0.0 && level <= 1.0)) throw UsageError("level must lie in (0, 1]");
  ExperimentConfig cfg = config;
  cfg.level = level;
  cfg.with_oracle = false;
  if (cfg.graph.kind != GraphKind::Matching) throw UsageError("power curves use the exact null of matchings");
  for (std::size_t t : cfg.t_grid)
    if (t % 2 != 0) throw UsageError("power curves need even t (exact null law)");
  const auto report = run_convergence(cfg);
  std::vector<PowerPoint> out;
  for (const auto& s : report.summaries) {
    PowerPoint pt;
    pt.t = s.t;
    pt.power_exact = s.power_exact.value_or(0.0);
    pt.power_eta = s.power_eta;
    const double reps = static_cast<double>(s.replicates);
    pt.se_exact = std::sqrt(pt.power_exact * (1.0 - pt.power_exact) / reps);
    pt.se_eta = std::sqrt(pt.power_eta * (1.0 - pt.power_eta) / reps);
    out.push_back(pt);
  }
  return out;
}

ExperimentConfig load_config(std::istream& in) {
  using nlohmann::json;
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  static const std::set<std::string> known{
      "f",     "g",        "p",      "t_grid", "replicates", "solver", "graph",  "k",     "alpha",
      "cap",   "seed",     "a_grid", "level",  "eta_c",      "eta_gamma", "record_greedy_length",
      "with_oracle", "workers", "experiment"};
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!known.count(it.key())) throw ParseError("unknown config key '" + it.key() + "'");

  ExperimentConfig c;
  try {
    if (j.contains("f")) c.f = parse_density(j.at("f").get<std::string>());
    if (j.contains("g")) c.g = parse_density(j.at("g").get<std::string>());
    if (j.contains("p")) c.p = j.at("p").get<double>();
    if (j.contains("t_grid")) c.t_grid = j.at("t_grid").get<std::vector<std::size_t>>();
    if (j.contains("replicates")) c.replicates = j.at("replicates").get<std::size_t>();
    if (j.contains("solver")) {
      const auto s = j.at("solver").get<std::string>();
      if (s == "exact")
        c.solver = SolverKind::Exact;
      else if (s == "greedy")
        c.solver = SolverKind::Greedy;
      else
        throw ParseError("solver must be exact or greedy");
    }
    if (j.contains("graph")) {
      const auto s = j.at("graph").get<std::string>();
      if (s == "matching")
        c.graph = {GraphKind::Matching, 0};
      else if (s == "knn")
        c.graph = {GraphKind::Knn, j.value("k", std::size_t{1})};
      else if (s == "mst")
        c.graph = {GraphKind::Mst, 0};
      else
        throw ParseError("graph must be matching, knn or mst");
    }
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("cap") && !j.at("cap").is_null()) c.cap = j.at("cap").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("a_grid")) c.a_grid = j.at("a_grid").get<std::vector<double>>();
    if (j.contains("level")) c.level = j.at("level").get<double>();
    if (j.contains("eta_c")) c.eta_c = j.at("eta_c").get<double>();
    if (j.contains("eta_gamma")) c.eta_gamma = j.at("eta_gamma").get<double>();
    if (j.contains("record_greedy_length")) c.record_greedy_length = j.at("record_greedy_length").get<bool>();
    if (j.contains("with_oracle")) c.with_oracle = j.at("with_oracle").get<bool>();
    if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid config value: ") + e.what());
  }
  c.validate();
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return load_config(in);
}

void write_report_csv(std::ostream& out, const ExperimentReport& report) {
  out.precision(17);
  out << "t,replicate,metric,value\n";
  for (const auto& r : report.records) {
    auto row = [&](const std::string& metric, double value) {
      out << r.t << ',' << r.replicate << ',' << metric << ',' << value << '\n';
    };
    row("m", static_cast<double>(r.m));
    row("n", static_cast<double>(r.n));
    row("chi", static_cast<double>(r.chi));
    row("chi_over_t", r.chi_over_t);
    if (r.cross_pairs) row("cross_pairs", static_cast<double>(*r.cross_pairs));
    if (r.matching_cost) row("matching_cost", *r.matching_cost);
    if (r.matching_length) row("matching_length", *r.matching_length);
    if (r.greedy_length) row("greedy_length", *r.greedy_length);
    if (r.pvalue) row("pvalue_exact", *r.pvalue);
    row("reject_exact", r.reject_exact ? 1.0 : 0.0);
    row("eta", r.eta);
    row("reject_eta", r.reject_eta ? 1.0 : 0.0);
    row("max_out_degree", static_cast<double>(r.max_out_degree));
    row("max_in_degree", static_cast<double>(r.max_in_degree));
    row("mean_out_degree", r.mean_out_degree);
    for (std::size_t a = 0; a < report.a_grid.size(); ++a) {
      std::ostringstream name;
      name.precision(17);
      name << "long_edge_fraction_a=" << report.a_grid[a];
      row(name.str(), r.long_edge_fraction[a]);
    }
  }
}

void write_summary_json(std::ostream& out, const ExperimentReport& report,
                        const std::optional<GreedyScaling>& scaling) {
  using nlohmann::json;
  json j;
  j["f"] = report.f;
  j["g"] = report.g;
  j["p"] = report.p;
  j["graph"] = report.graph;
  j["solver"] = report.solver;
  j["cost"] = report.cost;
  j["seed"] = report.seed;
  j["a_grid"] = report.a_grid;
  j["warnings"] = report.warnings;
  if (report.oracle) {
    j["oracle"] = {{"value", report.oracle->value},
                   {"error_estimate", report.oracle->error_estimate},
                   {"method", std::string(to_string(report.oracle->method))},
                   {"delta", report.oracle->delta}};
  } else {
    j["oracle"] = nullptr;
  }
  json per_t = json::array();
  for (const auto& s : report.summaries) {
    json e;
    e["t"] = s.t;
    e["m"] = s.m;
    e["n"] = s.n;
    e["replicates"] = s.replicates;
    e["mean_chi"] = s.mean_chi;
    e["var_chi"] = s.var_chi;
    e["mean_chi_over_t"] = s.mean_chi_over_t;
    e["sd_chi_over_t"] = s.sd_chi_over_t;
    e["se_chi_over_t"] = s.se_chi_over_t;
    e["null_mean_chi"] = s.null_mean_chi;
    e["null_var_chi"] = s.null_var_chi ? json(*s.null_var_chi) : json(nullptr);
    e["gap"] = s.gap ? json(*s.gap) : json(nullptr);
    e["power_exact"] = s.power_exact ? json(*s.power_exact) : json(nullptr);
    e["power_eta"] = s.power_eta;
    e["eta"] = s.eta;
    e["mean_greedy_length"] = s.mean_greedy_length ? json(*s.mean_greedy_length) : json(nullptr);
    e["mean_matching_length"] = s.mean_matching_length ? json(*s.mean_matching_length) : json(nullptr);
    e["mean_long_edge_fraction"] = s.mean_long_edge_fraction;
    per_t.push_back(std::move(e));
  }
  j["summaries"] = std::move(per_t);
  if (scaling) {
    j["greedy_scaling"] = {{"slope", scaling->slope},
                           {"intercept", scaling->intercept},
                           {"t", scaling->t},
                           {"mean_length", scaling->mean_length},
                           {"warnings", scaling->warnings}};
  }
  out << j.dump(2) << '\n';
}

}  // namespace crossmatch
