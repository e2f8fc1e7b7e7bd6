#include "rdsim/rds.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

#include "rdsim/csv.hpp"
#include "rdsim/errors.hpp"

namespace rdsim {

void SamplerConfig::validate(std::size_t population) const {
  if (num_seeds < 1) throw DomainError("number of seeds must be at least 1");
  if (coupons_per_node < 1) throw DomainError("coupons per node must be at least 1");
  if (num_seeds > target_sample_size) {
    throw DomainError(fmt::format("seeds ({}) exceed sample size ({})", num_seeds, target_sample_size));
  }
  if (target_sample_size > population) {
    throw DomainError(
        fmt::format("sample size {} exceeds population size {}", target_sample_size, population));
  }
}

std::size_t RecruitmentForest::max_wave() const {
  std::size_t w = 0;
  for (const auto& e : entries) w = std::max(w, e.wave);
  return w;
}

std::size_t RecruitmentForest::seed_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.recruiter; }));
}

std::size_t RecruitmentForest::attribute_index(const std::string& name) const {
  auto it = std::find(attribute_names.begin(), attribute_names.end(), name);
  if (it == attribute_names.end()) throw std::out_of_range(fmt::format("no attribute '{}' in forest", name));
  return static_cast<std::size_t>(it - attribute_names.begin());
}

std::vector<node_t> select_seeds(const Graph& g, std::size_t count, SeedSelection mode, Rng& rng) {
  const std::size_t n = g.node_count();
  if (count > n) throw DomainError(fmt::format("cannot select {} seeds from {} nodes", count, n));
  std::vector<node_t> pool(n);
  std::iota(pool.begin(), pool.end(), node_t{0});
  std::vector<node_t> seeds;
  seeds.reserve(count);
  if (mode == SeedSelection::uniform) {
    for (std::size_t i = 0; i < count; ++i) {
      std::swap(pool[i], pool[i + rng.below(n - i)]);
      seeds.push_back(pool[i]);
    }
    return seeds;
  }
  // Degree-weighted, sequential, without replacement. Falls back to uniform
  // among the remaining nodes once their total degree is zero.
  std::vector<double> weight(n);
  double total = 0.0;
  for (node_t v = 0; v < n; ++v) total += weight[v] = static_cast<double>(g.degree(v));
  std::vector<bool> taken(n, false);
  for (std::size_t i = 0; i < count; ++i) {
    node_t pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      pick = n;
      for (node_t v = 0; v < n; ++v) {
        if (taken[v] || weight[v] == 0.0) continue;
        pick = v;
        if (u < weight[v]) break;
        u -= weight[v];
      }
    } else {
      std::size_t k = rng.below(n - i);
      for (node_t v = 0; v < n; ++v) {
        if (taken[v]) continue;
        if (k-- == 0) {
          pick = v;
          break;
        }
      }
    }
    taken[pick] = true;
    total -= weight[pick];
    if (total < 0.5) total = 0.0;  // weights are integers
    seeds.push_back(pick);
  }
  return seeds;
}

namespace {

std::vector<std::uint8_t> attributes_of(std::span<const AttributeVector> attrs, node_t v) {
  std::vector<std::uint8_t> out;
  out.reserve(attrs.size());
  for (const auto& a : attrs) out.push_back(a[v]);
  return out;
}

}  // namespace

RecruitmentForest run_rds_from(const Graph& g, std::span<const AttributeVector> attributes,
                               const SamplerConfig& cfg, std::span<const node_t> seeds, Rng& rng) {
  const std::size_t n = g.node_count();
  cfg.validate(n);
  for (const auto& a : attributes) {
    if (a.size() != n) throw std::invalid_argument(fmt::format("attribute '{}' length mismatch", a.name()));
  }
  RecruitmentForest forest;
  for (const auto& a : attributes) forest.attribute_names.push_back(a.name());
  forest.entries.reserve(cfg.target_sample_size);

  std::vector<bool> sampled(n, false);
  std::vector<std::size_t> entry_of(n, 0);
  std::deque<node_t> queue;
  std::size_t next_seed_id = 0;

  auto add_seed = [&](node_t v) {
    sampled[v] = true;
    entry_of[v] = forest.entries.size();
    forest.entries.push_back({v, std::nullopt, 0, next_seed_id++, std::nullopt, g.degree(v),
                              attributes_of(attributes, v)});
    queue.push_back(v);
  };

  for (node_t s : seeds) {
    if (s >= n) throw std::invalid_argument(fmt::format("seed {} out of range", s));
    if (sampled[s]) throw std::invalid_argument(fmt::format("seed {} given twice", s));
    if (forest.entries.size() == cfg.target_sample_size) break;
    add_seed(s);
  }

  std::vector<node_t> candidates;
  while (forest.entries.size() < cfg.target_sample_size) {
    if (queue.empty()) {
      if (!cfg.reseed_on_death) {
        forest.truncated = true;
        break;
      }
      std::vector<node_t> unsampled;
      for (node_t v = 0; v < n; ++v) {
        if (!sampled[v]) unsampled.push_back(v);
      }
      if (unsampled.empty()) {
        forest.truncated = true;
        break;
      }
      add_seed(unsampled[rng.below(unsampled.size())]);
      ++forest.reseeds;
      continue;
    }
    const node_t recruiter = queue.front();
    queue.pop_front();
    candidates.clear();
    for (node_t w : g.neighbors(recruiter)) {
      if (!sampled[w]) candidates.push_back(w);
    }
    const std::size_t budget = cfg.target_sample_size - forest.entries.size();
    const std::size_t take = std::min({cfg.coupons_per_node, candidates.size(), budget});
    const auto& parent = forest.entries[entry_of[recruiter]];
    const std::size_t wave = parent.wave + 1, seed_id = parent.seed_id;
    for (std::size_t k = 0; k < take; ++k) {
      std::swap(candidates[k], candidates[k + rng.below(candidates.size() - k)]);
      const node_t recruit = candidates[k];
      sampled[recruit] = true;
      entry_of[recruit] = forest.entries.size();
      forest.entries.push_back({recruit, recruiter, wave, seed_id, k, g.degree(recruit),
                                attributes_of(attributes, recruit)});
      forest.recruitment_edges.emplace_back(recruiter, recruit);
      queue.push_back(recruit);
    }
  }
  return forest;
}

RecruitmentForest run_rds(const Graph& g, std::span<const AttributeVector> attributes,
                          const SamplerConfig& cfg, Rng& rng) {
  cfg.validate(g.node_count());
  const auto seeds = select_seeds(g, cfg.num_seeds, cfg.seed_selection, rng);
  return run_rds_from(g, attributes, cfg, seeds, rng);
}

void check_forest(const RecruitmentForest& f, const Graph& g, std::size_t coupons) {
  std::vector<std::size_t> position(g.node_count(), f.entries.size());
  std::vector<std::size_t> recruits(g.node_count(), 0);
  std::set<std::pair<node_t, std::size_t>> coupon_used;
  for (std::size_t i = 0; i < f.entries.size(); ++i) {
    const auto& e = f.entries[i];
    if (e.node >= g.node_count()) throw std::logic_error(fmt::format("node {} not in graph", e.node));
    if (position[e.node] != f.entries.size()) {
      throw std::logic_error(fmt::format("node {} sampled twice", e.node));
    }
    position[e.node] = i;
    if (e.reported_degree != g.degree(e.node)) {
      throw std::logic_error(fmt::format("node {} reported degree differs from graph", e.node));
    }
    if (!e.recruiter) {
      if (e.wave != 0 || e.coupon_index) throw std::logic_error(fmt::format("seed {} malformed", e.node));
      continue;
    }
    const node_t r = *e.recruiter;
    if (r >= g.node_count() || position[r] == f.entries.size()) {
      throw std::logic_error(fmt::format("recruiter of {} not sampled before it", e.node));
    }
    if (!g.has_edge(r, e.node)) {
      throw std::logic_error(fmt::format("recruitment {} -> {} is not a graph edge", r, e.node));
    }
    const auto& parent = f.entries[position[r]];
    if (e.wave != parent.wave + 1) throw std::logic_error(fmt::format("wave mismatch at {}", e.node));
    if (e.seed_id != parent.seed_id) throw std::logic_error(fmt::format("seed id mismatch at {}", e.node));
    if (++recruits[r] > coupons) throw std::logic_error(fmt::format("node {} exceeded {} coupons", r, coupons));
    if (!e.coupon_index || *e.coupon_index >= coupons || !coupon_used.emplace(r, *e.coupon_index).second) {
      throw std::logic_error(fmt::format("bad coupon index for recruit {}", e.node));
    }
  }
  std::size_t with_recruiter = 0;
  for (const auto& e : f.entries) with_recruiter += e.recruiter.has_value();
  if (with_recruiter != f.recruitment_edges.size()) {
    throw std::logic_error("recruitment edge list does not match entries");
  }
}

void write_forest(const std::string& path, const RecruitmentForest& f) {
  auto out = csv::open_for_write(path);
  out << "node,recruiter,wave,seed_id,coupon_index,degree";
  for (const auto& name : f.attribute_names) out << ',' << name;
  out << '\n';
  for (const auto& e : f.entries) {
    out << e.node << ',';
    if (e.recruiter) out << *e.recruiter;
    out << ',' << e.wave << ',' << e.seed_id << ',';
    if (e.coupon_index) out << *e.coupon_index;
    out << ',' << e.reported_degree;
    for (auto a : e.attributes) out << ',' << static_cast<int>(a);
    out << '\n';
  }
}

RecruitmentForest read_forest(const std::string& path) {
  const auto table = csv::read(path);
  const std::vector<std::string> fixed{"node", "recruiter", "wave", "seed_id", "coupon_index", "degree"};
  if (table.header.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), table.header.begin())) {
    throw FormatError(fmt::format("{}: header must start with {}", path, "node,recruiter,wave,seed_id,coupon_index,degree"));
  }
  RecruitmentForest f;
  f.attribute_names.assign(table.header.begin() + 6, table.header.end());
  std::set<node_t> seen;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto where = fmt::format("{}:{}", path, table.line_numbers[i]);
    auto nonneg = [&](const std::string& field) {
      const auto x = csv::parse_int(field, where);
      if (x < 0) throw FormatError(where + ": negative value");
      return static_cast<std::size_t>(x);
    };
    RecruitmentEntry e;
    e.node = static_cast<node_t>(nonneg(row[0]));
    if (!seen.insert(e.node).second) throw FormatError(fmt::format("{}: node {} appears twice", where, e.node));
    if (!row[1].empty()) e.recruiter = static_cast<node_t>(nonneg(row[1]));
    e.wave = nonneg(row[2]);
    e.seed_id = nonneg(row[3]);
    if (!row[4].empty()) e.coupon_index = nonneg(row[4]);
    e.reported_degree = nonneg(row[5]);
    for (std::size_t c = 6; c < row.size(); ++c) {
      const auto x = nonneg(row[c]);
      if (x > 1) throw FormatError(where + ": attribute values must be 0 or 1");
      e.attributes.push_back(static_cast<std::uint8_t>(x));
    }
    if (e.recruiter) f.recruitment_edges.emplace_back(*e.recruiter, e.node);
    f.entries.push_back(std::move(e));
  }
  return f;
}

}  // namespace rdsim
