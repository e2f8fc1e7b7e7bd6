#include <doctest.h>

#include <functional>
#include <string>

#include "rdsim/cli.hpp"
#include "rdsim/config.hpp"
#include "rdsim/errors.hpp"

using namespace rdsim;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = Config::parse(
      "# grid\n"
      "[network]\n"
      "n = 1000   # trailing comment\n"
      "p = 0.1, 0.5,0.8\n"
      "\n"
      "[rds]\n"
      "reseed = false\n"
      "seed_selection = uniform\n");
  const auto& net = cfg.section("network");
  CHECK(net.get_size("n") == 1000);
  CHECK(net.get_doubles("p") == std::vector<double>{0.1, 0.5, 0.8});
  CHECK(net.keys() == std::vector<std::string>{"n", "p"});
  const auto& rds = cfg.section("rds");
  CHECK_FALSE(rds.get_bool("reseed", true));
  CHECK(rds.get_string("seed_selection") == "uniform");
  CHECK(rds.get_size("coupons", 2) == 2);
  CHECK_NOTHROW(cfg.check_all_used());
  CHECK_FALSE(cfg.has_section("engage"));
  CHECK(cfg.section("engage").keys().empty());
}

TEST_CASE("unread keys and sections are errors") {
  const auto cfg = Config::parse("[network]\nn = 10\nmean_degre = 4\n[netwrok]\np = 0.5\n");
  cfg.section("network").get_size("n");
  const auto msg = message_of([&] { cfg.check_all_used(); });
  CHECK(msg.find("mean_degre") != std::string::npos);
  CHECK(msg.find("line 3") != std::string::npos);

  const auto cfg2 = Config::parse("[network]\nn = 10\n[netwrok]\np = 0.5\n");
  cfg2.section("network").get_size("n");
  CHECK(message_of([&] { cfg2.check_all_used(); }).find("netwrok") != std::string::npos);
}

TEST_CASE("malformed configs") {
  CHECK_THROWS_AS(Config::parse("[network\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("n = 3\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[a]\nnovalue\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
  CHECK_THROWS_AS(Config::parse("[a]\n[a]\n"), ConfigError);
  const auto cfg = Config::parse("[a]\nx = abc\nb = maybe\nlist = 1, two\n");
  const auto& a = cfg.section("a");
  CHECK(message_of([&] { a.get_double("x"); }).find("line 2") != std::string::npos);
  CHECK_THROWS_AS(a.get_bool("b", true), ConfigError);
  CHECK_THROWS_AS(a.get_sizes("list"), ConfigError);
  CHECK_THROWS_AS(a.get_double("missing"), ConfigError);
  CHECK_THROWS_AS(Config::load("/nonexistent/rdsim.cfg"), ConfigError);
}

TEST_CASE("subsections") {
  const auto cfg = Config::parse("[network]\n[network.CAS]\np = 0.5\n[network.HIV+]\np = 0.1\n[rds]\n");
  CHECK(cfg.subsections("network") == std::vector<std::string>{"CAS", "HIV+"});
}

TEST_CASE("experiment plan from config") {
  const auto cfg = Config::parse(
      "[network]\nn = 500\nmean_degree = 12\np = 0.5\ndiff_activity = 1, 4\nhomophily_r = 5\n"
      "[rds]\nsample_size = 100, 200\nseeds = 3\n"
      "[experiment]\nreplicates = 7\nseed = 42\nfixed_network = true\n");
  const auto plan = plan_from_config(cfg, false);
  CHECK_NOTHROW(cfg.check_all_used());
  CHECK(plan.population == 500);
  CHECK(plan.mean_degree == 12);
  CHECK(plan.prevalences == std::vector<double>{0.5});
  CHECK(plan.diff_activities == std::vector<double>{1, 4});
  CHECK(plan.homophily_rs == std::vector<double>{5});
  CHECK(plan.sample_sizes == std::vector<std::size_t>{100, 200});
  CHECK(plan.seeds == 3);
  CHECK(plan.coupons == 2);
  CHECK(plan.replicates == 7);
  CHECK(plan.master_seed == 42);
  CHECK(plan.fixed_network);

  const auto empty = Config::parse("");
  const auto desk = plan_from_config(empty, true);
  CHECK(desk.mean_degree == 20);
  CHECK(desk.replicates == 100);
}

TEST_CASE("engage scenario from config") {
  const auto cfg = Config::parse(
      "[engage]\npopulation = 8080\nreplicates = 5\n"
      "[network.A]\np = 0.4\ndiff_activity = 1.2\nhomophily_h = 0.1\n"
      "[network.B]\np = 0.2\nhomophily_r = 0.5\n"
      "[correlation]\nA:B = 0.05\n");
  const auto sc = engage_from_config(cfg, false);
  CHECK_NOTHROW(cfg.check_all_used());
  REQUIRE(sc.covariates.size() == 2);
  CHECK(sc.covariates[0].name == "A");
  CHECK(*sc.covariates[0].homophily_h == 0.1);
  CHECK(sc.covariates[1].diff_activity == 1.0);
  CHECK(sc.correlations(0, 1) == 0.05);
  CHECK(sc.correlations(1, 0) == 0.05);
  CHECK(sc.population == 8080);

  const auto bad = Config::parse("[network.A]\np = 0.4\nhomophily_r = 1\n[correlation]\nA:C = 0.1\n");
  CHECK(message_of([&] { engage_from_config(bad, false); }).find("'C'") != std::string::npos);

  const auto desk = engage_from_config(Config::parse(""), true);
  CHECK(desk.population == 4040);
  CHECK(desk.sampler.target_sample_size == 118);
}

TEST_CASE("sections owned by other subcommands can be tolerated") {
  const auto cfg = Config::parse("[network]\nn = 10\n[rds]\nseeds = 2\n[rds.extra]\nx = 1\n[bogus]\n");
  cfg.section("network").get_size("n");
  CHECK_NOTHROW(Config::parse("[network]\n[rds]\nseeds = 2\n").check_all_used({"network", "rds"}));
  CHECK(message_of([&] { cfg.check_all_used({"rds"}); }).find("bogus") != std::string::npos);
  CHECK(cfg.find("rds") != nullptr);
  CHECK(cfg.find("engage") == nullptr);

  // A tolerated section that was read still has its keys checked.
  const auto partial = Config::parse("[rds]\nseeds = 2\ncupons = 3\n");
  partial.section("rds").get_size("seeds");
  CHECK(message_of([&] { partial.check_all_used({"rds"}); }).find("cupons") != std::string::npos);
}
