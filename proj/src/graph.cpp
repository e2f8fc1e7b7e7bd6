#include "rdsim/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "rdsim/errors.hpp"

namespace rdsim {

Graph::Graph(std::size_t node_count, std::vector<Edge> edges) : edges_(std::move(edges)) {
  for (auto& [u, v] : edges_) {
    if (u == v) throw std::invalid_argument(fmt::format("self-loop at node {}", u));
    if (u >= node_count || v >= node_count) {
      throw std::invalid_argument(
          fmt::format("edge ({}, {}) out of range for {} nodes", u, v, node_count));
    }
    if (u > v) std::swap(u, v);
  }
  std::sort(edges_.begin(), edges_.end());
  auto dup = std::adjacent_find(edges_.begin(), edges_.end());
  if (dup != edges_.end()) {
    throw std::invalid_argument(fmt::format("parallel edge ({}, {})", dup->first, dup->second));
  }

  offsets_.assign(node_count + 1, 0);
  for (const auto& [u, v] : edges_) {
    ++offsets_[u + 1];
    ++offsets_[v + 1];
  }
  for (std::size_t i = 0; i < node_count; ++i) offsets_[i + 1] += offsets_[i];
  neighbors_.resize(offsets_.back());
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  // Edges are sorted by (u, v), so each adjacency run comes out sorted once
  // the lower endpoints of v's edges are placed before the higher ones.
  for (const auto& [u, v] : edges_) neighbors_[fill[v]++] = u;
  for (const auto& [u, v] : edges_) neighbors_[fill[u]++] = v;
}

Graph Graph::complete(std::size_t node_count) {
  std::vector<Edge> edges;
  edges.reserve(node_count * (node_count - (node_count > 0)) / 2);
  for (node_t u = 0; u < node_count; ++u) {
    for (node_t v = u + 1; v < node_count; ++v) edges.emplace_back(u, v);
  }
  return Graph(node_count, std::move(edges));
}

bool Graph::has_edge(node_t u, node_t v) const {
  auto nb = neighbors(u);
  return std::binary_search(nb.begin(), nb.end(), v);
}

AttributeVector::AttributeVector(std::string name, std::vector<std::uint8_t> values)
    : name_(std::move(name)), values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] > 1) {
      throw std::invalid_argument(
          fmt::format("attribute '{}' has non-binary value at node {}", name_, i));
    }
  }
}

std::size_t AttributeVector::count_ones() const {
  return static_cast<std::size_t>(std::count(values_.begin(), values_.end(), std::uint8_t{1}));
}

AttributeVector AttributeVector::swapped() const {
  std::vector<std::uint8_t> flipped(values_.size());
  std::transform(values_.begin(), values_.end(), flipped.begin(),
                 [](std::uint8_t x) { return static_cast<std::uint8_t>(1 - x); });
  return AttributeVector(name_, std::move(flipped));
}

std::size_t DegreeDistribution::node_total() const {
  std::size_t total = 0;
  for (const auto& [k, n] : counts) total += n;
  return total;
}

std::size_t DegreeDistribution::degree_total() const {
  std::size_t total = 0;
  for (const auto& [k, n] : counts) total += k * n;
  return total;
}

DegreeDistribution degree_distribution(const Graph& g) {
  DegreeDistribution d;
  for (node_t v = 0; v < g.node_count(); ++v) {
    const auto k = g.degree(v);
    ++d.counts[k];
    d.max_degree = std::max(d.max_degree, k);
  }
  return d;
}

double mean_degree(const Graph& g) {
  return 2.0 * static_cast<double>(g.edge_count()) / static_cast<double>(g.node_count());
}

double prevalence(const AttributeVector& z) {
  return static_cast<double>(z.count_ones()) / static_cast<double>(z.size());
}

double differential_activity(const Graph& g, const AttributeVector& z) {
  if (z.size() != g.node_count()) {
    throw std::invalid_argument("attribute length does not match node count");
  }
  std::size_t n1 = 0, ends1 = 0, ends0 = 0;
  for (node_t v = 0; v < g.node_count(); ++v) {
    if (z[v]) {
      ++n1;
      ends1 += g.degree(v);
    } else {
      ends0 += g.degree(v);
    }
  }
  const std::size_t n0 = g.node_count() - n1;
  if (n1 == 0 || n0 == 0) throw UndefinedEstimand("differential activity: empty attribute group");
  if (ends0 == 0) throw UndefinedEstimand("differential activity: z=0 group has no edges");
  return (static_cast<double>(ends1) / static_cast<double>(n1)) /
         (static_cast<double>(ends0) / static_cast<double>(n0));
}

MixingCounts mixing_counts(const Graph& g, const AttributeVector& z) {
  if (z.size() != g.node_count()) {
    throw std::invalid_argument("attribute length does not match node count");
  }
  MixingCounts m;
  for (const auto& [u, v] : g.edges()) m.add(z[u], z[v]);
  return m;
}

double homophily_r(const MixingCounts& m) {
  if (m.cross == 0) throw UndefinedEstimand("R undefined: no cross-attribute edges");
  return static_cast<double>(m.within_1) / static_cast<double>(m.cross);
}

double homophily_newman(const MixingCounts& m) {
  const auto total = static_cast<double>(m.total());
  if (total == 0.0) throw UndefinedEstimand("homophily undefined: graph has no edges");
  const double e11 = static_cast<double>(m.within_1) / total;
  const double e00 = static_cast<double>(m.within_0) / total;
  const double half_cross = static_cast<double>(m.cross) / (2.0 * total);
  const double a1 = e11 + half_cross;
  const double a0 = e00 + half_cross;
  const double expected = a1 * a1 + a0 * a0;
  const double denom = 1.0 - expected;
  if (denom <= 0.0) throw UndefinedEstimand("homophily undefined: all edge ends in one group");
  return std::clamp((e11 + e00 - expected) / denom, -1.0, 1.0);
}

double h_from_r(double r, double p, double da) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("prevalence {} outside (0, 1)", p));
  if (!(da > 0.0)) throw DomainError(fmt::format("differential activity {} must be positive", da));
  if (!(r >= 0.0)) throw DomainError(fmt::format("R {} must be nonnegative", r));
  const double eta = (1.0 - p) / (p * da);
  return r / (1.0 + r) - 2.0 / (1.0 + eta * (1.0 + 2.0 * r));
}

double r_from_h(double h, double p, double da) {
  const double lowest = h_from_r(0.0, p, da);
  if (!(h > lowest && h < 1.0)) {
    throw DomainError(fmt::format(
        "homophily {} not attainable for p={}, Da={}: must lie in ({}, 1)", h, p, da, lowest));
  }
  double lo = 0.0, hi = 1.0;
  while (h_from_r(hi, p, da) < h) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) throw DomainError("homophily too close to 1 to invert");
  }
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double value = h_from_r(mid, p, da);
    if (std::abs(value - h) <= 1e-12) return mid;
    (value < h ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace rdsim
