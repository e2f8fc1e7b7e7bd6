#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdsim/graph.hpp"
#include "rdsim/random.hpp"

namespace rdsim {

enum class SeedSelection { uniform, degree_proportional };

struct SamplerConfig {
  std::size_t num_seeds = 5;
  std::size_t coupons_per_node = 2;
  std::size_t target_sample_size = 200;
  SeedSelection seed_selection = SeedSelection::uniform;
  bool reseed_on_death = true;

  // Throws DomainError unless 1 <= s <= n <= population and c >= 1.
  void validate(std::size_t population) const;
};

struct RecruitmentEntry {
  node_t node = 0;
  std::optional<node_t> recruiter;
  std::size_t wave = 0;
  std::size_t seed_id = 0;
  std::optional<std::size_t> coupon_index;
  std::size_t reported_degree = 0;
  std::vector<std::uint8_t> attributes;
};

// The observed RDS data: sampled nodes in recruitment order, each with its
// recruiter, wave, and reported degree.
struct RecruitmentForest {
  std::vector<std::string> attribute_names;
  std::vector<RecruitmentEntry> entries;
  std::vector<Edge> recruitment_edges;  // (recruiter, recruit)
  std::size_t reseeds = 0;
  bool truncated = false;  // queue emptied before the target size

  std::size_t size() const noexcept { return entries.size(); }
  std::size_t max_wave() const;
  std::size_t seed_count() const;
  // Index of the named attribute; throws std::out_of_range if absent.
  std::size_t attribute_index(const std::string& name) const;
};

// Sequential sampling without replacement of s seeds.
std::vector<node_t> select_seeds(const Graph& g, std::size_t count, SeedSelection mode, Rng& rng);

// Breadth-first recruitment by coupon issuance. Each dequeued node recruits
// min(c, unsampled neighbours, remaining budget) of its currently unsampled
// neighbours uniformly at random. If the queue empties early, a new uniform
// seed is drawn when reseeding is enabled; otherwise the result is flagged
// truncated.
RecruitmentForest run_rds(const Graph& g, std::span<const AttributeVector> attributes,
                          const SamplerConfig& cfg, Rng& rng);

// As run_rds but starting from the given seeds instead of drawing them.
RecruitmentForest run_rds_from(const Graph& g, std::span<const AttributeVector> attributes,
                               const SamplerConfig& cfg, std::span<const node_t> seeds, Rng& rng);

// Throws std::logic_error describing the first violated forest invariant
// (duplicate node, non-graph recruitment edge, coupon overrun, wave mismatch).
void check_forest(const RecruitmentForest& f, const Graph& g, std::size_t coupons);

// Header: node,recruiter,wave,seed_id,coupon_index,degree,<attribute names>.
// recruiter and coupon_index are empty for seeds.
void write_forest(const std::string& path, const RecruitmentForest& f);
RecruitmentForest read_forest(const std::string& path);

}  // namespace rdsim
