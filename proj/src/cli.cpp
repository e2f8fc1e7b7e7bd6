#include "rdsim/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "rdsim/covgen.hpp"
#include "rdsim/csv.hpp"
#include "rdsim/errors.hpp"
#include "rdsim/estimators.hpp"
#include "rdsim/netgen.hpp"
#include "rdsim/rds.hpp"

namespace fs = std::filesystem;

namespace rdsim {

namespace {

// Every section any subcommand reads. A subcommand ignores the ones it does
// not use, so one file can drive a whole pipeline.
const std::vector<std::string> kSections{"network", "correlation", "rds", "experiment", "engage"};

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  bool desk_scale = false;
  int verbosity = 0;
  std::string edges_path;
  std::string attributes_path;
  std::vector<std::string> forest_paths;
};

GenerationMode parse_mode(const ConfigSection& s) {
  const auto v = s.get_string("mode", "bernoulli");
  if (v == "bernoulli") return GenerationMode::bernoulli;
  if (v == "exact-count" || v == "exact_count") return GenerationMode::exact_count;
  throw ConfigError(fmt::format("[{}] mode: expected 'bernoulli' or 'exact-count', got '{}'", s.name(), v));
}

SeedSelection parse_seed_selection(const ConfigSection& s) {
  const auto v = s.get_string("seed_selection", "uniform");
  if (v == "uniform") return SeedSelection::uniform;
  if (v == "degree" || v == "degree-proportional") return SeedSelection::degree_proportional;
  throw ConfigError(fmt::format("[{}] seed_selection: expected 'uniform' or 'degree', got '{}'", s.name(), v));
}

SamplerConfig sampler_from(const ConfigSection& s, SamplerConfig base) {
  base.num_seeds = s.get_size("seeds", base.num_seeds);
  base.coupons_per_node = s.get_size("coupons", base.coupons_per_node);
  base.target_sample_size = s.get_size("sample_size", base.target_sample_size);
  base.seed_selection = parse_seed_selection(s);
  base.reseed_on_death = s.get_bool("reseed", base.reseed_on_death);
  return base;
}

std::vector<CovariateTarget> covariates_from(const Config& cfg) {
  std::vector<CovariateTarget> out;
  for (const auto& name : cfg.subsections("network")) {
    const auto& s = cfg.section("network." + name);
    CovariateTarget t;
    t.name = name;
    t.p = s.get_double("p");
    t.diff_activity = s.get_double("diff_activity", 1.0);
    if (s.has("homophily_r") && s.has("homophily_h")) {
      throw ConfigError(fmt::format("[{}]: give homophily_r or homophily_h, not both", s.name()));
    }
    if (s.has("homophily_r")) t.homophily_r = s.get_double("homophily_r");
    if (s.has("homophily_h")) t.homophily_h = s.get_double("homophily_h");
    out.push_back(std::move(t));
  }
  return out;
}

Eigen::MatrixXd correlations_from(const Config& cfg, const std::vector<CovariateTarget>& covs) {
  const auto k = static_cast<Eigen::Index>(covs.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(k, k);
  const auto& s = cfg.section("correlation");
  auto index_of = [&](const std::string& name) -> Eigen::Index {
    for (Eigen::Index i = 0; i < k; ++i) {
      if (covs[static_cast<std::size_t>(i)].name == name) return i;
    }
    throw ConfigError(fmt::format("[correlation]: unknown covariate '{}'", name));
  };
  for (const auto& key : s.keys()) {
    const auto colon = key.find(':');
    if (colon == std::string::npos) {
      throw ConfigError(fmt::format("[correlation]: key '{}' must have the form A:B", key));
    }
    const auto a = index_of(key.substr(0, colon)), b = index_of(key.substr(colon + 1));
    if (a == b) throw ConfigError(fmt::format("[correlation]: '{}' pairs a covariate with itself", key));
    m(a, b) = m(b, a) = s.get_double(key);
  }
  return m;
}

NetworkTargets single_targets(const ConfigSection& s) {
  NetworkTargets t;
  t.n = s.get_size("n");
  t.p = s.get_double("p");
  t.mean_degree = s.get_double("mean_degree");
  t.diff_activity = s.get_double("diff_activity", 1.0);
  if (s.has("homophily_r") == s.has("homophily_h")) {
    throw ConfigError("[network]: exactly one of homophily_r or homophily_h is required");
  }
  t.homophily_r = s.has("homophily_r") ? s.get_double("homophily_r")
                                       : r_from_h(s.get_double("homophily_h"), t.p, t.diff_activity);
  return t;
}

// Single-stage subcommands borrow [experiment] seed without claiming the
// rest of that section.
std::uint64_t master_seed(const Options& o, const Config& cfg) {
  if (o.seed) return *o.seed;
  const auto* ex = cfg.find("experiment");
  return ex ? ex->get_size("seed", 1) : 1;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = csv::open_for_write(path.string());
  out << text;
}

void write_manifest(const Options& o, const std::string& command, std::uint64_t seed,
                    const std::optional<Config>& cfg) {
  std::string text = fmt::format("rdsim {}\nsubcommand: {}\nmaster_seed: {}\nthreads: {}\ndesk_scale: {}\n",
                                 kVersion, command, seed, o.threads, o.desk_scale ? "true" : "false");
  if (cfg) {
    text += fmt::format("config: {}\n--- config ---\n{}", cfg->origin(), cfg->text());
    if (!cfg->text().empty() && cfg->text().back() != '\n') text += '\n';
  }
  write_text(fs::path(o.out_dir) / "manifest.txt", text);
}

std::string stats_line(const Graph& g, const AttributeVector& z) {
  const auto t = realized_truth(g, z);
  return fmt::format("{}: N={} edges={} mean_degree={:.4f} p={:.4f} Da={} R={} h={}", z.name(), g.node_count(),
                     g.edge_count(), *t.mean_degree, *t.p, csv::number(t.d_a), csv::number(t.r),
                     csv::number(t.h));
}

int cmd_netgen(const Options& o, std::ostream& out) {
  const auto cfg = Config::load(o.config_path);
  const auto& net = cfg.section("network");
  const auto seed = master_seed(o, cfg);
  Rng rng(derive_seed(seed, "netgen", 0));
  const auto covs = covariates_from(cfg);
  if (covs.empty()) {
    const auto targets = single_targets(net);
    const auto mode = parse_mode(net);
    const auto name = net.get_string("attribute", "z");
    cfg.check_all_used(kSections);
    const auto sol = solve_edge_targets(targets);
    out << fmt::format("targets: n1={} n0={} E11={:.3f} E10={:.3f} E00={:.3f} q11={:.6f} q10={:.6f} q00={:.6f}\n",
                       sol.n1, sol.n0, sol.e11, sol.e10, sol.e00, sol.q11, sol.q10, sol.q00);
    const auto pop = generate_network(targets, rng, mode, name);
    fs::create_directories(o.out_dir);
    write_edge_list((fs::path(o.out_dir) / "edges.csv").string(), pop.graph);
    const AttributeVector attrs[] = {pop.z};
    write_attributes((fs::path(o.out_dir) / "attributes.csv").string(), attrs);
    write_manifest(o, "netgen", seed, cfg);
    out << "realized " << stats_line(pop.graph, pop.z) << '\n';
    return kExitOk;
  }
  const auto n = net.get_size("n");
  const auto degree = net.get_double("mean_degree");
  const auto corr = correlations_from(cfg, covs);
  cfg.check_all_used(kSections);
  CovariateSpec spec;
  for (const auto& c : covs) {
    spec.names.push_back(c.name);
    spec.marginals.push_back(c.p);
  }
  spec.correlations = corr;
  const auto z = generate_binary_covariates(spec, n, rng);
  out << fmt::format("covariates: {} rows x {} columns\n", z.rows(), z.cols());
  const auto fit = fit_theta(covs, degree, z);
  out << fmt::format("fit: {} iterations, max relative residual {:.3e}\n", fit.iterations, fit.max_relative_residual);
  const auto g = generate_from_model(fit.model, z, rng);
  fs::create_directories(o.out_dir);
  write_edge_list((fs::path(o.out_dir) / "edges.csv").string(), g);
  const auto attrs = z.columns();
  write_attributes((fs::path(o.out_dir) / "attributes.csv").string(), attrs);
  write_manifest(o, "netgen", seed, cfg);
  for (const auto& a : attrs) out << "realized " << stats_line(g, a) << '\n';
  return kExitOk;
}

int cmd_covgen(const Options& o, std::ostream& out) {
  const auto cfg = Config::load(o.config_path);
  const auto& net = cfg.section("network");
  const auto seed = master_seed(o, cfg);
  const auto n = net.get_size("n");
  const auto covs = covariates_from(cfg);
  if (covs.empty()) throw ConfigError("covgen needs at least one [network.<name>] section");
  const auto corr = correlations_from(cfg, covs);
  cfg.check_all_used(kSections);
  CovariateSpec spec;
  for (const auto& c : covs) {
    spec.names.push_back(c.name);
    spec.marginals.push_back(c.p);
  }
  spec.correlations = corr;
  Rng rng(derive_seed(seed, "covgen", 0));
  const auto z = generate_binary_covariates(spec, n, rng);
  fs::create_directories(o.out_dir);
  const auto cols = z.columns();
  write_attributes((fs::path(o.out_dir) / "attributes.csv").string(), cols);
  write_manifest(o, "covgen", seed, cfg);
  out << fmt::format("covgen: {} rows x {} covariates written\n", z.rows(), z.cols());
  return kExitOk;
}

int cmd_rds(const Options& o, std::ostream& out) {
  const auto cfg = Config::load(o.config_path);
  const auto seed = master_seed(o, cfg);
  const auto sampler = sampler_from(cfg.section("rds"), SamplerConfig{});
  cfg.check_all_used(kSections);
  const auto attrs = read_attributes(o.attributes_path);
  if (attrs.empty()) throw FormatError("attribute file has no attribute columns");
  const auto g = read_edge_list(o.edges_path, attrs.front().size());
  Rng rng(derive_seed(seed, "rds", 0));
  const auto forest = run_rds(g, attrs, sampler, rng);
  fs::create_directories(o.out_dir);
  write_forest((fs::path(o.out_dir) / "forest.csv").string(), forest);
  write_manifest(o, "rds", seed, cfg);
  out << fmt::format("rds: sampled {} nodes, {} seeds ({} reseeds), max wave {}{}\n", forest.size(),
                     forest.seed_count(), forest.reseeds, forest.max_wave(), forest.truncated ? ", truncated" : "");
  return kExitOk;
}

int cmd_estimate(const Options& o, std::ostream& out) {
  std::optional<Config> cfg;
  if (!o.config_path.empty()) {
    cfg = Config::load(o.config_path);
    cfg->check_all_used(kSections);
  }
  std::string text = estimates_csv_header();
  for (const auto& path : o.forest_paths) {
    const auto forest = read_forest(path);
    const auto est = estimate_all(forest);
    text += estimates_csv_rows(fs::path(path).stem().string(), est);
    for (const auto& a : est.attributes) {
      out << fmt::format("{} [{}]: n={} Da_hat={} h_hat={} RDS-II={} crude={}\n", path, a.name, est.sample_size,
                         csv::number(a.d_a), csv::number(a.h), csv::number(a.rds2_prevalence),
                         csv::number(a.crude_prevalence));
    }
  }
  fs::create_directories(o.out_dir);
  write_text(fs::path(o.out_dir) / "estimates.csv", text);
  write_manifest(o, "estimate", 0, cfg);
  return kExitOk;
}

int finish_experiment(const Options& o, const ExperimentResult& result, const std::string& command,
                      std::uint64_t seed, const Config& cfg, std::ostream& out, std::ostream& err) {
  fs::create_directories(o.out_dir);
  write_text(fs::path(o.out_dir) / "replicates.csv", replicates_csv(result.records));
  write_text(fs::path(o.out_dir) / "summary.csv", summary_csv(result.summary));
  write_manifest(o, command, seed, cfg);
  for (const auto& s : result.skipped_cells) err << "warning: skipped cell " << s << '\n';
  std::size_t ok = 0, skipped = 0, errored = 0;
  for (const auto& r : result.records) {
    ok += r.status == RecordStatus::ok;
    skipped += r.status == RecordStatus::skipped;
    errored += r.status == RecordStatus::error;
  }
  out << fmt::format("{}: {} records ({} ok, {} skipped, {} errors); {} summary rows written to {}\n", command,
                     result.records.size(), ok, skipped, errored, result.summary.size(), o.out_dir);
  return result.any_error ? kExitCellErrors : kExitOk;
}

int cmd_experiment(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = Config::load(o.config_path);
  auto plan = plan_from_config(cfg, o.desk_scale);
  if (o.seed) plan.master_seed = *o.seed;
  plan.threads = o.threads;
  cfg.check_all_used(kSections);
  plan.validate();
  out << fmt::format("experiment: N={} mean_degree={} cells={} x n={} replicates={} seed={}\n", plan.population,
                     plan.mean_degree,
                     plan.prevalences.size() * plan.diff_activities.size() * plan.homophily_rs.size(),
                     plan.sample_sizes.size(), plan.replicates, plan.master_seed);
  const auto result = run_experiment(plan);
  return finish_experiment(o, result, "experiment", plan.master_seed, cfg, out, err);
}

int cmd_engage(const Options& o, std::ostream& out, std::ostream& err) {
  const auto cfg = o.config_path.empty() ? Config::parse("", "<built-in>") : Config::load(o.config_path);
  auto sc = engage_from_config(cfg, o.desk_scale);
  if (o.seed) sc.master_seed = *o.seed;
  sc.threads = o.threads;
  cfg.check_all_used(kSections);
  sc.validate();
  out << fmt::format("engage-mimic: N={} mean_degree={} s={} c={} n={} replicates={} seed={}\n", sc.population,
                     sc.mean_degree, sc.sampler.num_seeds, sc.sampler.coupons_per_node,
                     sc.sampler.target_sample_size, sc.replicates, sc.master_seed);
  const auto result = run_engage_mimic(sc);
  return finish_experiment(o, result, "engage-mimic", sc.master_seed, cfg, out, err);
}

}  // namespace

ExperimentPlan plan_from_config(const Config& cfg, bool desk_scale) {
  auto plan = desk_scale ? ExperimentPlan::desk() : ExperimentPlan::faithful();
  const auto& net = cfg.section("network");
  plan.population = net.get_size("n", plan.population);
  plan.mean_degree = net.get_double("mean_degree", plan.mean_degree);
  if (net.has("p")) plan.prevalences = net.get_doubles("p");
  if (net.has("diff_activity")) plan.diff_activities = net.get_doubles("diff_activity");
  if (net.has("homophily_h")) throw ConfigError("[network] experiments take homophily_r grids, not homophily_h");
  if (net.has("homophily_r")) plan.homophily_rs = net.get_doubles("homophily_r");
  plan.mode = parse_mode(net);

  const auto& rds = cfg.section("rds");
  plan.seeds = rds.get_size("seeds", plan.seeds);
  plan.coupons = rds.get_size("coupons", plan.coupons);
  if (rds.has("sample_size")) plan.sample_sizes = rds.get_sizes("sample_size");
  plan.seed_selection = parse_seed_selection(rds);
  plan.reseed_on_death = rds.get_bool("reseed", plan.reseed_on_death);

  const auto& ex = cfg.section("experiment");
  plan.replicates = ex.get_size("replicates", plan.replicates);
  plan.master_seed = ex.get_size("seed", plan.master_seed);
  plan.fixed_network = ex.get_bool("fixed_network", plan.fixed_network);
  return plan;
}

EngageScenario engage_from_config(const Config& cfg, bool desk_scale) {
  auto sc = EngageScenario::full();
  const auto& en = cfg.section("engage");
  sc.population = en.get_size("population", sc.population);
  sc.mean_degree = en.get_double("mean_degree", sc.mean_degree);
  sc.replicates = en.get_size("replicates", sc.replicates);
  sc.master_seed = en.get_size("seed", sc.master_seed);
  const auto desk_population = en.get_size("desk_population", 4040);
  const auto desk_replicates = en.get_size("desk_replicates", 200);
  sc.sampler = sampler_from(cfg.section("rds"), sc.sampler);
  auto covs = covariates_from(cfg);
  if (!covs.empty()) {
    sc.covariates = std::move(covs);
    sc.correlations = correlations_from(cfg, sc.covariates);
  } else if (cfg.has_section("correlation")) {
    sc.correlations = correlations_from(cfg, sc.covariates);
  }
  if (desk_scale) sc = sc.scaled(desk_population, desk_replicates);
  return sc;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Population network generation and respondent-driven sampling simulation", "rdsim"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;
  std::uint64_t seed_value = 0;

  auto common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", o.config_path, "Configuration file");
    if (config_required) c->required();
    c->check(CLI::ExistingFile);
    sub->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed_value, "Master seed (overrides the config)");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--desk-scale", o.desk_scale, "Use reduced desk-scale defaults");
    sub->add_flag("-v,--verbose", o.verbosity, "Verbose output");
  };

  auto* netgen = app.add_subcommand("netgen", "Generate a population network");
  common(netgen, true);
  auto* covgen = app.add_subcommand("covgen", "Generate correlated binary covariates");
  common(covgen, true);
  auto* rds = app.add_subcommand("rds", "Run respondent-driven sampling on a network");
  common(rds, true);
  rds->add_option("--edges", o.edges_path, "Edge-list file")->required()->check(CLI::ExistingFile);
  rds->add_option("--attributes", o.attributes_path, "Attribute file")->required()->check(CLI::ExistingFile);
  auto* estimate = app.add_subcommand("estimate", "Estimate network parameters from recruitment forests");
  common(estimate, false);
  estimate->add_option("--forest", o.forest_paths, "Recruitment forest file(s)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* experiment = app.add_subcommand("experiment", "Run the replicated bias study over a parameter grid");
  common(experiment, true);
  auto* engage = app.add_subcommand("engage-mimic", "Run the multi-covariate Engage-style scenario");
  common(engage, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (app.get_subcommands().front()->count("--seed")) o.seed = seed_value;

  try {
    if (*netgen) return cmd_netgen(o, out);
    if (*covgen) return cmd_covgen(o, out);
    if (*rds) return cmd_rds(o, out);
    if (*estimate) return cmd_estimate(o, out);
    if (*experiment) return cmd_experiment(o, out, err);
    if (*engage) return cmd_engage(o, out, err);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InfeasibleTargets& e) {
    err << "infeasible targets: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace rdsim
