#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdsim/estimators.hpp"
#include "rdsim/netgen.hpp"
#include "rdsim/rds.hpp"

namespace rdsim {

// Grid sweep over single-attribute population networks and RDS sample sizes.
struct ExperimentPlan {
  std::size_t population = 1000;
  double mean_degree = 99.9;
  std::vector<double> prevalences{0.1, 0.5, 0.8};
  std::vector<double> diff_activities{0.5, 1.0, 4.0};
  std::vector<double> homophily_rs{1.0, 5.0};
  std::vector<std::size_t> sample_sizes{200, 400, 800};
  std::size_t seeds = 5;
  std::size_t coupons = 2;
  SeedSelection seed_selection = SeedSelection::uniform;
  bool reseed_on_death = true;
  GenerationMode mode = GenerationMode::bernoulli;
  std::size_t replicates = 500;
  std::uint64_t master_seed = 1;
  // One population network per cell shared by all replicates, instead of a
  // fresh network per replicate.
  bool fixed_network = false;
  std::size_t threads = 1;

  // The full published grid: N = 1000, mean degree 99.9, 500 replicates.
  static ExperimentPlan faithful();
  // Same grid at mean degree 20 with 100 replicates.
  static ExperimentPlan desk();

  void validate() const;
};

enum class RecordStatus { ok, skipped, error };
std::string to_string(RecordStatus s);

struct Truth {
  std::optional<double> p, mean_degree, d_a, r, h;
};

struct Estimates {
  std::optional<double> d_a, h, r, h_induced, p_rds2, p_crude;
};

// One (cell, attribute, replicate) outcome. Biases are always computed
// against the realized population network, never the targets.
struct ReplicateRecord {
  std::string cell;
  std::string attribute;
  std::optional<double> target_p, target_da, target_r, target_h;
  std::size_t sample_size = 0;
  std::size_t replicate = 0;
  RecordStatus status = RecordStatus::ok;
  std::string reason;
  Truth truth;
  Estimates estimate;
  Estimates bias;  // relative bias per estimand; p_crude unused
  std::size_t reseeds = 0;
  std::size_t max_wave = 0;
  std::size_t sampled = 0;
  bool truncated = false;
};

// Boxplot content for one (cell, attribute, estimand).
struct BiasSummaryRow {
  std::string cell;
  std::string attribute;
  std::optional<double> target_p, target_da, target_r, target_h;
  std::size_t sample_size = 0;
  std::string estimand;
  std::size_t replicates = 0;
  std::size_t count = 0;      // defined relative biases
  std::size_t undefined = 0;  // ok rows whose estimate or truth is undefined
  std::size_t skipped = 0;    // skipped or errored rows
  std::optional<double> min, q1, median, q3, max, mean;

  double undefined_rate() const {
    return replicates == 0 ? 0.0 : static_cast<double>(undefined + skipped) / static_cast<double>(replicates);
  }
};

struct ExperimentResult {
  std::vector<ReplicateRecord> records;
  std::vector<BiasSummaryRow> summary;
  bool any_error = false;
  std::vector<std::string> skipped_cells;  // "cell: reason"
};

// Estimands summarized, in output order.
const std::vector<std::string>& estimand_names();

// Linear interpolation between order statistics: position q * (n - 1) in
// the sorted sample. sorted must be nonempty and ascending.
double quantile(const std::vector<double>& sorted, double q);

std::vector<BiasSummaryRow> summarize(const std::vector<ReplicateRecord>& records);

// Realized population statistics for one attribute.
Truth realized_truth(const Graph& g, const AttributeVector& z);

ExperimentResult run_experiment(const ExperimentPlan& plan);

// Multi-covariate scenario mimicking a published RDS study.
struct EngageScenario {
  std::size_t population = 40400;
  double mean_degree = 16.63;
  std::vector<CovariateTarget> covariates;
  Eigen::MatrixXd correlations;
  SamplerConfig sampler{27, 6, 1179, SeedSelection::uniform, true};
  std::size_t replicates = 1000;
  std::uint64_t master_seed = 1;
  std::size_t threads = 1;

  // Population and sample parameters at full published scale.
  static EngageScenario full();
  // Scales N down, preserving prevalences, mean degree, Da, h, seeds,
  // coupons, and the sampling fraction n/N.
  EngageScenario scaled(std::size_t population, std::size_t replicates) const;
  // N = 4040, 200 replicates.
  EngageScenario desk() const { return scaled(4040, 200); }

  CovariateSpec covariate_spec() const;
  void validate() const;
};

ExperimentResult run_engage_mimic(const EngageScenario& scenario);

std::string replicates_csv(const std::vector<ReplicateRecord>& records);
std::string summary_csv(const std::vector<BiasSummaryRow>& rows);

// Runs body(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace rdsim
