#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdsim/covgen.hpp"
#include "rdsim/graph.hpp"
#include "rdsim/random.hpp"

namespace rdsim {

// Population-network targets for a single binary attribute.
struct NetworkTargets {
  std::size_t n = 0;
  double p = 0.5;
  double mean_degree = 0.0;
  double diff_activity = 1.0;
  double homophily_r = 1.0;

  // Group sizes are fixed: n1 = round(p * n).
  std::size_t group1_size() const;
  std::size_t group0_size() const { return n - group1_size(); }
  // Throws DomainError for targets outside the valid parameter space.
  void validate() const;
};

// Expected edge counts per dyad class and the matching per-dyad tie
// probabilities.
struct DyadClassSolution {
  std::size_t n1 = 0, n0 = 0;
  double e11 = 0, e10 = 0, e00 = 0;
  double q11 = 0, q10 = 0, q00 = 0;

  double total() const { return e11 + e10 + e00; }
};

// Solves
//   e11 + e10 + e00 = n * mean_degree / 2
//   e11 = R * e10
//   (2 e11 + e10) / n1 = Da * (2 e00 + e10) / n0
// Throws InfeasibleTargets naming the violated bound when a count is
// negative or a tie probability leaves [0, 1].
DyadClassSolution solve_edge_targets(const NetworkTargets& t);

enum class GenerationMode { bernoulli, exact_count };

struct Population {
  Graph graph;
  AttributeVector z;
};

// Exactly n1 randomly placed nodes get z = 1. Bernoulli mode draws every
// dyad independently with its class probability; exact-count mode draws
// round(e_class) distinct dyads uniformly within each class.
Population generate_network(const NetworkTargets& t, Rng& rng,
                            GenerationMode mode = GenerationMode::bernoulli,
                            std::string attribute_name = "z");

// Dyad-independent exponential-family graph model over binary covariates:
// logit P(tie i~j) = edges + sum_k match[k] * 1{z_ik == z_jk}
//                          + sum_k activity[k] * (z_ik + z_jk).
struct DyadModel {
  std::vector<std::string> covariates;
  double edges = 0.0;
  std::vector<double> match;
  std::vector<double> activity;

  static DyadModel zeros(std::vector<std::string> covariates);
  std::size_t size() const { return 1 + 2 * covariates.size(); }
  Eigen::VectorXd to_vector() const;
  void assign(const Eigen::VectorXd& theta);
};

// Statistics paired with DyadModel's coefficients: edge count, per-covariate
// matching-edge count (E11 + E00), and per-covariate z=1 edge ends
// (2 E11 + E10).
struct ModelStatistics {
  double edges = 0.0;
  std::vector<double> match;
  std::vector<double> ends;

  Eigen::VectorXd to_vector() const;
  static ModelStatistics from_vector(const Eigen::VectorXd& v);
};

// Exact expectations under the model, grouping dyads by the joint covariate
// pattern of their endpoints (cost depends on the number of distinct
// patterns, not on N).
ModelStatistics expected_statistics(const DyadModel& model, const CovariateMatrix& z);

// The same statistics counted on a realized graph.
ModelStatistics observed_statistics(const Graph& g, const CovariateMatrix& z);

struct CovariateTarget {
  std::string name;
  double p = 0.5;
  double diff_activity = 1.0;
  std::optional<double> homophily_r;
  std::optional<double> homophily_h;  // converted with r_from_h when R is absent

  double resolved_r() const;
};

// Target statistics implied by per-covariate (Da, R) and a common mean
// degree, using the group sizes realized in z.
ModelStatistics target_statistics(std::span<const CovariateTarget> targets, double mean_degree,
                                  const CovariateMatrix& z);

struct FitOptions {
  double tolerance = 1e-6;  // max relative residual accepted
  int max_iterations = 100;
  int max_halvings = 20;
};

struct FitResult {
  DyadModel model;
  ModelStatistics target;
  ModelStatistics achieved;
  double max_relative_residual = 0.0;
  int iterations = 0;
};

// Relative residual of each statistic: |achieved - target| / max(|target|, 1).
double max_relative_residual(const ModelStatistics& achieved, const ModelStatistics& target);

// Newton moment matching with step halving. Throws ConvergenceError carrying
// the final residuals if the tolerance is not met.
FitResult fit_theta(const ModelStatistics& target, const CovariateMatrix& z,
                    std::size_t population, double mean_degree, const FitOptions& opts = {});
FitResult fit_theta(std::span<const CovariateTarget> targets, double mean_degree,
                    const CovariateMatrix& z, const FitOptions& opts = {});

// One independent Bernoulli draw per dyad.
Graph generate_from_model(const DyadModel& model, const CovariateMatrix& z, Rng& rng);

double logistic(double x);
double logit(double p);

}  // namespace rdsim
