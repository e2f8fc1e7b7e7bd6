#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rdsim {

using node_t = std::uint32_t;
using Edge = std::pair<node_t, node_t>;

// Undirected simple graph in compressed adjacency form. Immutable after
// construction. Edges are stored once with first < second, sorted.
class Graph {
 public:
  Graph() = default;

  // Throws std::invalid_argument on self-loops, duplicate edges, or
  // out-of-range endpoints. Endpoint order within an edge is irrelevant.
  Graph(std::size_t node_count, std::vector<Edge> edges);

  static Graph complete(std::size_t node_count);

  std::size_t node_count() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  std::span<const node_t> neighbors(node_t v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }
  std::size_t degree(node_t v) const { return offsets_[v + 1] - offsets_[v]; }
  bool has_edge(node_t u, node_t v) const;

 private:
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_;
  std::vector<node_t> neighbors_;
};

// Named binary nodal attribute.
class AttributeVector {
 public:
  AttributeVector() = default;
  // Throws std::invalid_argument if any value is not 0 or 1.
  AttributeVector(std::string name, std::vector<std::uint8_t> values);

  const std::string& name() const noexcept { return name_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::uint8_t operator[](std::size_t i) const { return values_[i]; }
  const std::vector<std::uint8_t>& values() const noexcept { return values_; }
  std::size_t count_ones() const;

  // Relabels 0 <-> 1.
  AttributeVector swapped() const;

 private:
  std::string name_;
  std::vector<std::uint8_t> values_;
};

struct DegreeDistribution {
  std::map<std::size_t, std::size_t> counts;  // degree k -> number of nodes D_k
  std::size_t max_degree = 0;

  std::size_t node_total() const;
  std::size_t degree_total() const;  // sum_k k * D_k
};

// Edge counts by endpoint attribute class; each undirected edge once.
struct MixingCounts {
  std::uint64_t within_1 = 0;
  std::uint64_t within_0 = 0;
  std::uint64_t cross = 0;

  std::uint64_t total() const noexcept { return within_1 + within_0 + cross; }
  void add(std::uint8_t a, std::uint8_t b) noexcept {
    if (a != b) ++cross;
    else if (a == 1) ++within_1;
    else ++within_0;
  }
  friend bool operator==(const MixingCounts&, const MixingCounts&) = default;
};

DegreeDistribution degree_distribution(const Graph& g);

double mean_degree(const Graph& g);
double prevalence(const AttributeVector& z);

// Mean degree of z=1 nodes over mean degree of z=0 nodes. Throws
// UndefinedEstimand if a group is empty or the z=0 group has no edge ends.
double differential_activity(const Graph& g, const AttributeVector& z);

MixingCounts mixing_counts(const Graph& g, const AttributeVector& z);

// R = within_1 / cross. Throws UndefinedEstimand when cross == 0.
double homophily_r(const MixingCounts& m);

// Newman's categorical assortativity for a binary attribute on an undirected
// graph. Cross edges are split evenly between the (1,0) and (0,1) cells of
// the symmetric mixing matrix. Throws UndefinedEstimand if there are no
// edges or all edge ends fall in one group.
double homophily_newman(const MixingCounts& m);

// Closed-form link between R and h given prevalence and differential
// activity: h = R/(1+R) - 2/(1 + eta(1+2R)), eta = (1/Da)(1-p)/p.
// Throws DomainError for p outside (0,1), Da <= 0, or R < 0.
double h_from_r(double r, double p, double da);

// Inverse of h_from_r in R by bisection; |h_from_r(result) - h| <= 1e-10.
// Throws DomainError unless h_from_r(0, p, da) < h < 1.
double r_from_h(double h, double p, double da);

// File formats. Edge list: header "src,dst", 0-based, src < dst.
// Attributes: header "node,<name>,...", one row per node, values 0/1.
void write_edge_list(const std::string& path, const Graph& g);
Graph read_edge_list(const std::string& path, std::size_t node_count = 0);
void write_attributes(const std::string& path, std::span<const AttributeVector> attrs);
std::vector<AttributeVector> read_attributes(const std::string& path);

}  // namespace rdsim
