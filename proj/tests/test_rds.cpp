#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <queue>
#include <stdexcept>
#include <vector>

#include "rdsim/errors.hpp"
#include "rdsim/rds.hpp"

using namespace rdsim;

namespace {

Graph star(std::size_t leaves) {
  std::vector<Edge> e;
  for (node_t i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return Graph(leaves + 1, e);
}

Graph path(std::size_t n) {
  std::vector<Edge> e;
  for (node_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, e);
}

Graph random_graph(std::size_t n, double density, Rng& rng) {
  std::vector<Edge> e;
  for (node_t i = 0; i < n; ++i) {
    for (node_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(density)) e.emplace_back(i, j);
    }
  }
  return Graph(n, e);
}

// Random spanning tree plus extra edges, so the graph is connected.
Graph connected_graph(std::size_t n, double density, Rng& rng) {
  std::vector<Edge> e;
  for (node_t i = 1; i < n; ++i) e.emplace_back(static_cast<node_t>(rng.below(i)), i);
  for (node_t i = 0; i < n; ++i) {
    for (node_t j = i + 1; j < n; ++j) {
      if (rng.bernoulli(density) && std::find(e.begin(), e.end(), Edge{i, j}) == e.end()) e.emplace_back(i, j);
    }
  }
  return Graph(n, e);
}

std::vector<AttributeVector> parity_attribute(std::size_t n) {
  std::vector<std::uint8_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i % 2;
  return {AttributeVector("odd", v)};
}

SamplerConfig config(std::size_t s, std::size_t c, std::size_t n) {
  SamplerConfig cfg;
  cfg.num_seeds = s;
  cfg.coupons_per_node = c;
  cfg.target_sample_size = n;
  return cfg;
}

std::vector<std::size_t> bfs_distance(const Graph& g, node_t source) {
  std::vector<std::size_t> d(g.node_count(), SIZE_MAX);
  std::queue<node_t> q;
  d[source] = 0;
  q.push(source);
  while (!q.empty()) {
    const node_t v = q.front();
    q.pop();
    for (node_t u : g.neighbors(v)) {
      if (d[u] == SIZE_MAX) {
        d[u] = d[v] + 1;
        q.push(u);
      }
    }
  }
  return d;
}

}  // namespace

TEST_CASE("seed selection") {
  Rng rng(1);
  const auto g = path(10);
  for (auto mode : {SeedSelection::uniform, SeedSelection::degree_proportional}) {
    auto all = select_seeds(g, 10, mode, rng);
    std::sort(all.begin(), all.end());
    for (node_t i = 0; i < 10; ++i) CHECK(all[i] == i);
  }
  CHECK_THROWS_AS(select_seeds(g, 11, SeedSelection::uniform, rng), DomainError);

  std::vector<double> freq(10, 0.0);
  for (int i = 0; i < 100000; ++i) freq[select_seeds(g, 1, SeedSelection::uniform, rng)[0]] += 1e-5;
  for (double f : freq) CHECK(std::abs(f - 0.1) <= 0.01);

  const auto s = star(4);
  double center = 0;
  for (int i = 0; i < 100000; ++i) center += select_seeds(s, 1, SeedSelection::degree_proportional, rng)[0] == 0;
  CHECK(std::abs(center / 1e5 - 0.5) <= 0.01);

  auto picks = select_seeds(s, 3, SeedSelection::degree_proportional, rng);
  std::sort(picks.begin(), picks.end());
  CHECK(std::adjacent_find(picks.begin(), picks.end()) == picks.end());
}

TEST_CASE("recruitment on small graphs") {
  Rng rng(2);
  const auto s = star(4);
  const auto attrs = parity_attribute(5);
  const std::vector<node_t> center{0};
  const auto f = run_rds_from(s, attrs, config(1, 2, 3), center, rng);
  REQUIRE(f.size() == 3);
  CHECK(f.entries[0].node == 0);
  CHECK_FALSE(f.entries[0].recruiter.has_value());
  CHECK(f.entries[1].recruiter == 0u);
  CHECK(f.entries[2].recruiter == 0u);
  CHECK(f.max_wave() == 1);
  CHECK(f.recruitment_edges.size() == 2);
  CHECK(f.entries[0].reported_degree == 4);
  CHECK(f.entries[1].coupon_index == 0u);
  CHECK(f.entries[2].coupon_index == 1u);

  const auto p = path(8);
  const std::vector<node_t> end{0};
  const auto chain = run_rds_from(p, parity_attribute(8), config(1, 2, 8), end, rng);
  CHECK(chain.size() == 8);
  CHECK(chain.max_wave() == 7);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(chain.entries[i].node == i);
    CHECK(chain.entries[i].wave == i);
    CHECK(chain.entries[i].attributes[0] == i % 2);
  }
}

TEST_CASE("a single seed with two coupons needs at least three waves for eight nodes") {
  Rng rng(3);
  for (int inst = 0; inst < 50; ++inst) {
    const auto g = connected_graph(8 + rng.below(30), 0.3, rng);
    const auto f = run_rds(g, parity_attribute(g.node_count()), config(1, 2, 8), rng);
    CHECK(f.size() == 8);
    CHECK(f.max_wave() >= 3);
  }
}

TEST_CASE("forest invariants hold over random graphs and configs") {
  Rng rng(4);
  for (int inst = 0; inst < 300; ++inst) {
    const std::size_t n = 2 + rng.below(60);
    const auto g = random_graph(n, rng.uniform() * 0.3, rng);
    const std::size_t s = 1 + rng.below(std::min<std::size_t>(n, 6));
    const std::size_t size = s + rng.below(n - s + 1);
    auto cfg = config(s, 1 + rng.below(4), size);
    cfg.reseed_on_death = rng.bernoulli(0.5);
    cfg.seed_selection = rng.bernoulli(0.3) ? SeedSelection::degree_proportional : SeedSelection::uniform;
    if (cfg.seed_selection == SeedSelection::degree_proportional && g.edge_count() == 0) continue;
    const auto f = run_rds(g, parity_attribute(n), cfg, rng);
    CHECK_NOTHROW(check_forest(f, g, cfg.coupons_per_node));
    CHECK(f.size() <= size);
    if (cfg.reseed_on_death) {
      CHECK(f.size() == size);
      CHECK_FALSE(f.truncated);
      CHECK(f.seed_count() == s + f.reseeds);
    } else {
      CHECK(f.reseeds == 0);
      CHECK(f.seed_count() == s);
      CHECK(f.truncated == (f.size() < size));
    }
    CHECK(f.recruitment_edges.size() == f.size() - f.seed_count());
    for (const auto& e : f.entries) CHECK(e.reported_degree == g.degree(e.node));
  }
}

TEST_CASE("unbounded coupons give a breadth-first prefix") {
  Rng rng(5);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t n = 5 + rng.below(50);
    const auto g = connected_graph(n, 0.1, rng);
    const std::size_t size = 1 + rng.below(n);
    const auto f = run_rds(g, parity_attribute(n), config(1, n, size), rng);
    REQUIRE(f.size() == size);
    const auto dist = bfs_distance(g, f.entries[0].node);
    std::vector<bool> sampled(n, false);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto& e = f.entries[i];
      sampled[e.node] = true;
      CHECK(e.wave == dist[e.node]);
      if (i > 0) CHECK(f.entries[i - 1].wave <= e.wave);
    }
    for (node_t v = 0; v < n; ++v) {
      if (dist[v] < f.max_wave()) CHECK(sampled[v]);
    }
  }
}

TEST_CASE("recruitment is deterministic for a fixed stream") {
  Rng gen(6);
  const auto g = random_graph(200, 0.05, gen);
  const auto attrs = parity_attribute(200);
  Rng a(42), b(42);
  const auto fa = run_rds(g, attrs, config(5, 2, 100), a);
  const auto fb = run_rds(g, attrs, config(5, 2, 100), b);
  REQUIRE(fa.size() == fb.size());
  for (std::size_t i = 0; i < fa.size(); ++i) {
    CHECK(fa.entries[i].node == fb.entries[i].node);
    CHECK(fa.entries[i].recruiter == fb.entries[i].recruiter);
  }
}

TEST_CASE("chain death: truncation or reseeding") {
  const Graph g(4, {{0, 1}, {2, 3}});
  const auto attrs = parity_attribute(4);
  const std::vector<node_t> seed{0};
  auto cfg = config(1, 2, 4);
  cfg.reseed_on_death = false;
  Rng rng(7);
  const auto cut = run_rds_from(g, attrs, cfg, seed, rng);
  CHECK(cut.size() == 2);
  CHECK(cut.truncated);

  cfg.reseed_on_death = true;
  const auto full = run_rds_from(g, attrs, cfg, seed, rng);
  CHECK(full.size() == 4);
  CHECK_FALSE(full.truncated);
  CHECK(full.reseeds == 1);
  CHECK(full.seed_count() == 2);
  CHECK(full.entries[2].wave == 0);
  CHECK(full.entries[2].seed_id == 1);
}

TEST_CASE("sampler config validation") {
  CHECK_THROWS_AS(config(0, 2, 5).validate(10), DomainError);
  CHECK_THROWS_AS(config(6, 2, 5).validate(10), DomainError);
  CHECK_THROWS_AS(config(1, 0, 5).validate(10), DomainError);
  CHECK_THROWS_AS(config(1, 2, 11).validate(10), DomainError);
  CHECK_NOTHROW(config(10, 1, 10).validate(10));
}

TEST_CASE("check_forest rejects broken forests") {
  const auto g = path(4);
  Rng rng(8);
  const std::vector<node_t> seed{0};
  const auto good = run_rds_from(g, parity_attribute(4), config(1, 2, 4), seed, rng);
  CHECK_NOTHROW(check_forest(good, g, 2));

  auto dup = good;
  dup.entries[3].node = 1;
  CHECK_THROWS_AS(check_forest(dup, g, 2), std::logic_error);

  auto wave = good;
  wave.entries[2].wave = 5;
  CHECK_THROWS_AS(check_forest(wave, g, 2), std::logic_error);

  auto offgraph = good;
  offgraph.entries[2].recruiter = 0;
  offgraph.entries[2].wave = 1;
  offgraph.recruitment_edges[1] = {0, 2};
  CHECK_THROWS_AS(check_forest(offgraph, g, 2), std::logic_error);

  const auto s = star(3);
  const auto wide = run_rds_from(s, parity_attribute(4), config(1, 3, 4), seed, rng);
  CHECK_THROWS_AS(check_forest(wide, s, 2), std::logic_error);
}

TEST_CASE("forest file round trip") {
  Rng rng(9);
  const auto g = random_graph(80, 0.1, rng);
  std::vector<std::uint8_t> other(80);
  for (auto& x : other) x = rng.bernoulli(0.3);
  auto attrs = parity_attribute(80);
  attrs.emplace_back("other", other);
  const auto f = run_rds(g, attrs, config(3, 2, 40), rng);
  const auto path = std::filesystem::temp_directory_path() / "rdsim_forest_roundtrip.csv";
  write_forest(path.string(), f);
  const auto back = read_forest(path.string());
  std::filesystem::remove(path);
  CHECK(back.attribute_names == f.attribute_names);
  REQUIRE(back.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto& a = f.entries[i];
    const auto& b = back.entries[i];
    CHECK(a.node == b.node);
    CHECK(a.recruiter == b.recruiter);
    CHECK(a.wave == b.wave);
    CHECK(a.seed_id == b.seed_id);
    CHECK(a.coupon_index == b.coupon_index);
    CHECK(a.reported_degree == b.reported_degree);
    CHECK(a.attributes == b.attributes);
  }
  CHECK(back.recruitment_edges == f.recruitment_edges);
}
