#include <cmath>

#include "doctest.h"
#include "regraph/analysis.hpp"
#include "regraph/error.hpp"

using namespace regraph;

TEST_CASE("churn scripts parse joins, leaves and comments") {
  const auto steps = parse_churn_script("join\n# note\n\njoin   # trailing\nleave 2\n");
  REQUIRE(steps.size() == 3);
  CHECK(steps[0].kind == ChurnKind::join);
  CHECK(steps[2].kind == ChurnKind::leave);
  CHECK(steps[2].peer == peer(2));
  for (const char* bad : {"hop\n", "leave\n", "leave 0\n", "join 3\n", "leave x\n"}) {
    CHECK_THROWS_AS(parse_churn_script(bad), Error);
  }
  Network net(2);
  apply_churn(net, steps, RandomSource(1));
  CHECK(net.size() == 2);
  CHECK_FALSE(net.contains(peer(2)));
  CHECK(net.contains(peer(3)));
}

TEST_CASE("growth with churn reaches the target size") {
  const Network a = grow_with_churn(2, 500, 0.3, RandomSource(4));
  CHECK(a.size() == 500);
  CHECK(a.id_bound() > 501);
  a.check_invariants();
  CHECK(grow_with_churn(2, 500, 0.0, RandomSource(4)) == grow_network(2, 500, RandomSource(4).derive(1)));
  CHECK_THROWS_AS(grow_with_churn(2, 10, 1.0, RandomSource(4)), Error);
}

TEST_CASE("sweep rows, determinism and thread independence") {
  SweepConfig cfg;
  cfg.sizes = {10, 31};
  cfg.replicas = 4;
  cfg.seed = 5;
  const auto rows = run_sweep(cfg);
  CHECK(rows.size() == 2 * 3 * 4);
  CHECK(rows.front().n == 10);
  CHECK(rows.front().extra == 0);
  CHECK(rows.back().n == 31);
  CHECK(rows.back().extra == 2);
  for (const auto& r : rows) {
    CHECK(r.delay_mismatches == 0);
    if (r.extra == 0) CHECK(r.disconnected_after == r.disconnected_before);
  }
  cfg.jobs = 3;
  CHECK(sweep_csv(run_sweep(cfg)) == sweep_csv(rows));

  cfg.extra = {0};
  CHECK(run_sweep(cfg).size() == 2 * 4);

  const auto means = sweep_means(rows);
  CHECK(means.size() == 6);
  CHECK(disconnected_csv(means).rfind("N,K,mean_disconnected\n10,0,", 0) == 0);
  CHECK(max_delay_csv(means).rfind("N,K,mean_max_delay\n", 0) == 0);
  CHECK(sweep_csv(rows).rfind("N,M,K,replica,disconnected_before,disconnected_after,extra_uploaders,max_delay\n", 0) == 0);

  cfg.replicas = 0;
  CHECK_THROWS_AS(run_sweep(cfg), Error);
}

TEST_CASE("least-squares fit") {
  const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
  const LinearFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  const std::vector<double> one{1};
  CHECK_THROWS_AS(fit_line(one, one), Error);
}

TEST_CASE("small verification suites") {
  SuiteConfig cfg;
  cfg.seed = 3;
  cfg.replicas = 5;
  for (const auto& r : verify_delay(cfg)) CHECK_MESSAGE(r.pass, r.check);

  SuiteConfig props;
  props.n = 1500;
  props.seed = 4;
  for (const auto& r : verify_properties(props)) CHECK_MESSAGE(r.pass, r.check);

  SuiteConfig uni;
  uni.n = 3;
  uni.flows = 2;
  uni.replicas = 20000;
  for (const auto& r : verify_uniformity(uni)) CHECK_MESSAGE(r.pass, r.check);

  const nlohmann::json j = CheckResult{"x", 5, 2, {}, 0.5, 0.4, 0.05, true};
  for (const char* key : {"check", "N", "M", "params", "empirical", "bound", "margin", "pass"}) CHECK(j.contains(key));
}
