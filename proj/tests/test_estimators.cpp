#include <doctest.h>

#include <stdexcept>

#include "rdsim/errors.hpp"
#include "rdsim/estimators.hpp"

using namespace rdsim;

namespace {

struct Member {
  std::size_t degree;
  std::uint8_t z;
  std::optional<node_t> recruiter;
};

// Forest whose node ids are the member positions.
RecruitmentForest forest_of(const std::vector<Member>& members) {
  RecruitmentForest f;
  f.attribute_names = {"z"};
  for (std::size_t i = 0; i < members.size(); ++i) {
    RecruitmentEntry e;
    e.node = static_cast<node_t>(i);
    e.recruiter = members[i].recruiter;
    e.reported_degree = members[i].degree;
    e.attributes = {members[i].z};
    if (e.recruiter) {
      e.wave = f.entries[*e.recruiter].wave + 1;
      f.recruitment_edges.emplace_back(*e.recruiter, e.node);
    }
    f.entries.push_back(e);
  }
  return f;
}

}  // namespace

TEST_CASE("differential activity estimate") {
  CHECK(*estimate_da(forest_of({{4, 1, {}}, {2, 1, {}}, {3, 0, {}}}), 0) == doctest::Approx(1.0));
  CHECK(*estimate_da(forest_of({{5, 1, {}}, {5, 0, {}}, {5, 0, {}}}), 0) == 1.0);
  CHECK(*estimate_da(forest_of({{6, 1, {}}, {2, 0, {}}, {4, 0, {}}}), 0) == doctest::Approx(2.0));
  CHECK_FALSE(estimate_da(forest_of({{4, 1, {}}, {2, 1, {}}}), 0).has_value());
  CHECK_FALSE(estimate_da(forest_of({{4, 0, {}}}), 0).has_value());
}

TEST_CASE("homophily from the recruitment tree") {
  const auto within = forest_of({{1, 1, {}}, {1, 1, 0}, {1, 0, {}}, {1, 0, 2}});
  CHECK(*estimate_homophily(within, 0).h == doctest::Approx(1.0));
  CHECK_FALSE(estimate_homophily(within, 0).r.has_value());

  const auto cross = forest_of({{1, 1, {}}, {1, 0, 0}, {1, 1, 1}});
  CHECK(*estimate_homophily(cross, 0).h == doctest::Approx(-1.0));
  CHECK(*estimate_homophily(cross, 0).r == 0.0);

  // within_1 = 1, cross = 1, within_0 = 0.
  const auto mixed = forest_of({{1, 1, {}}, {1, 1, 0}, {1, 0, 1}});
  const auto m = recruitment_mixing(mixed, 0);
  CHECK(m.within_1 == 1);
  CHECK(m.cross == 1);
  CHECK(m.within_0 == 0);
  CHECK(*estimate_homophily(mixed, 0).h == doctest::Approx(-1.0 / 3));
  CHECK(*estimate_homophily(mixed, 0).r == doctest::Approx(1.0));

  const auto seeds_only = forest_of({{1, 1, {}}, {1, 0, {}}});
  CHECK_FALSE(estimate_homophily(seeds_only, 0).h.has_value());
  CHECK_FALSE(estimate_homophily(seeds_only, 0).r.has_value());
}

TEST_CASE("tree homophily equals graph statistics on the tree") {
  Rng rng(12);
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 2 + rng.below(40);
    std::vector<Member> members;
    std::vector<std::uint8_t> z;
    for (std::size_t i = 0; i < n; ++i) {
      std::optional<node_t> rec;
      if (i > 0 && rng.bernoulli(0.85)) rec = static_cast<node_t>(rng.below(i));
      const std::uint8_t v = rng.bernoulli(0.4);
      members.push_back({1 + rng.below(9), v, rec});
      z.push_back(v);
    }
    const auto f = forest_of(members);
    const Graph tree(n, f.recruitment_edges);
    const AttributeVector attr("z", z);
    const auto est = estimate_homophily(f, 0);
    const auto m = mixing_counts(tree, attr);
    CHECK(recruitment_mixing(f, 0) == m);
    bool h_defined = true, r_defined = true;
    double h = 0, r = 0;
    try {
      h = homophily_newman(m);
    } catch (const UndefinedEstimand&) {
      h_defined = false;
    }
    try {
      r = homophily_r(m);
    } catch (const UndefinedEstimand&) {
      r_defined = false;
    }
    CHECK(est.h.has_value() == h_defined);
    CHECK(est.r.has_value() == r_defined);
    if (h_defined && est.h) CHECK(*est.h == h);
    if (r_defined && est.r) CHECK(*est.r == r);
    if (est.h) {
      CHECK(*est.h >= -1.0);
      CHECK(*est.h <= 1.0);
    }
  }
}

TEST_CASE("induced homophily uses every population tie among sampled nodes") {
  // Triangle 0-1-2 plus pendant 3 on node 2; the tree sees only two ties.
  const Graph g(4, {{0, 1}, {0, 2}, {1, 2}, {2, 3}});
  const auto f = forest_of({{2, 1, {}}, {2, 1, 0}, {3, 0, 0}});
  const auto tree = recruitment_mixing(f, 0);
  CHECK(tree.total() == 2);
  const auto induced = induced_homophily(f, g, 0);
  // Induced ties: 0-1 within_1, 0-2 and 1-2 cross.
  MixingCounts expect;
  expect.within_1 = 1;
  expect.cross = 2;
  CHECK(*induced.h == doctest::Approx(homophily_newman(expect)));
  CHECK(*induced.r == doctest::Approx(0.5));
}

TEST_CASE("RDS-II prevalence") {
  CHECK(*rds2_prevalence(forest_of({{2, 1, {}}, {1, 0, {}}}), 0) == doctest::Approx(1.0 / 3));
  CHECK(*rds2_prevalence(forest_of({{7, 1, {}}}), 0) == 1.0);
  const auto equal = forest_of({{3, 1, {}}, {3, 0, {}}, {3, 1, {}}, {3, 0, {}}, {3, 0, {}}});
  CHECK(*rds2_prevalence(equal, 0) == doctest::Approx(crude_prevalence(equal, 0)));
  CHECK(crude_prevalence(equal, 0) == doctest::Approx(0.4));
  CHECK_THROWS_AS(rds2_prevalence(forest_of({{0, 1, {}}, {2, 0, {}}}), 0), std::invalid_argument);
  CHECK_FALSE(rds2_prevalence(RecruitmentForest{{"z"}, {}, {}, 0, false}, 0).has_value());
}

TEST_CASE("RDS-II invariances") {
  Rng rng(13);
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 1 + rng.below(30);
    const std::size_t scale = 1 + rng.below(5);
    std::vector<Member> base, scaled, swapped;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t d = 1 + rng.below(20);
      const std::uint8_t z = rng.bernoulli(0.5);
      base.push_back({d, z, {}});
      scaled.push_back({d * scale, z, {}});
      swapped.push_back({d, static_cast<std::uint8_t>(1 - z), {}});
    }
    const double p = *rds2_prevalence(forest_of(base), 0);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    CHECK(*rds2_prevalence(forest_of(scaled), 0) == doctest::Approx(p).epsilon(1e-12));
    CHECK(*rds2_prevalence(forest_of(swapped), 0) == doctest::Approx(1 - p).epsilon(1e-12));
  }
}

TEST_CASE("label swap leaves tree homophily unchanged") {
  const std::vector<Member> a{{1, 1, {}}, {1, 1, 0}, {1, 0, 1}, {1, 0, 2}, {1, 0, 3}, {1, 1, 0}};
  std::vector<Member> b = a;
  for (auto& m : b) m.z = 1 - m.z;
  CHECK(*estimate_homophily(forest_of(a), 0).h == doctest::Approx(*estimate_homophily(forest_of(b), 0).h));
}

TEST_CASE("relative bias") {
  CHECK(*relative_bias(1.0, 1.0) == 0.0);
  CHECK(*relative_bias(1.1, 1.0) == doctest::Approx(0.1));
  CHECK(*relative_bias(0.8, 1.0) == doctest::Approx(-0.2));
  CHECK_FALSE(relative_bias(0.5, 0.0).has_value());
  CHECK_FALSE(relative_bias(std::nullopt, 1.0).has_value());
  CHECK_FALSE(relative_bias(1.0, std::nullopt).has_value());
}

TEST_CASE("estimates table") {
  const auto f = forest_of({{4, 1, {}}, {2, 1, 0}, {3, 0, 1}});
  const auto e = estimate_all(f);
  CHECK(e.sample_size == 3);
  CHECK(e.max_wave == 2);
  REQUIRE(e.attributes.size() == 1);
  CHECK(e.attributes[0].name == "z");
  CHECK(*e.attributes[0].d_a == doctest::Approx(1.0));
  CHECK(e.attributes[0].crude_prevalence == doctest::Approx(2.0 / 3));
  CHECK(estimates_csv_header() ==
        "forest,attribute,sample_size,max_wave,d_a_hat,h_hat,r_hat,rds2_prevalence,crude_prevalence\n");
  const auto rows = estimates_csv_rows("f1", e);
  CHECK(rows.rfind("f1,z,3,2,1,", 0) == 0);

  const auto lonely = estimate_all(forest_of({{4, 1, {}}}));
  CHECK(estimates_csv_rows("f2", lonely).rfind("f2,z,1,0,,,,1,1", 0) == 0);
}
