#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rdsim/graph.hpp"
#include "rdsim/rds.hpp"

namespace rdsim {

// Undefined estimates are std::nullopt.
struct HomophilyEstimate {
  std::optional<double> h;
  std::optional<double> r;
};

struct AttributeEstimates {
  std::string name;
  std::optional<double> d_a;
  std::optional<double> h;
  std::optional<double> r;
  std::optional<double> rds2_prevalence;
  double crude_prevalence = 0.0;
};

struct SampleEstimates {
  std::size_t sample_size = 0;
  std::size_t max_wave = 0;
  std::vector<AttributeEstimates> attributes;
};

// Ratio of mean reported degree, z=1 over z=0, among sampled nodes.
std::optional<double> estimate_da(const RecruitmentForest& f, std::size_t attr);

// Mixing counts over recruiter-recruit pairs only.
MixingCounts recruitment_mixing(const RecruitmentForest& f, std::size_t attr);

// Newman h and R from the recruitment tree.
HomophilyEstimate estimate_homophily(const RecruitmentForest& f, std::size_t attr);

// Homophily of the population subgraph induced by the sampled nodes. Needs
// the population graph, so it is an oracle quantity RDS never observes.
HomophilyEstimate induced_homophily(const RecruitmentForest& f, const Graph& g, std::size_t attr);

// Inverse-degree weighted prevalence. Throws std::invalid_argument if any
// reported degree is zero; returns nullopt for an empty sample.
std::optional<double> rds2_prevalence(const RecruitmentForest& f, std::size_t attr);

double crude_prevalence(const RecruitmentForest& f, std::size_t attr);

SampleEstimates estimate_all(const RecruitmentForest& f);

// (estimate - truth) / truth; nullopt if either side is undefined or the
// truth is zero.
std::optional<double> relative_bias(std::optional<double> estimate, std::optional<double> truth);

// Header and rows of the per-forest estimates CSV (one row per attribute).
std::string estimates_csv_header();
std::string estimates_csv_rows(const std::string& forest_id, const SampleEstimates& e);

}  // namespace rdsim
