#include <cmath>

#include "doctest.h"
#include "regraph/analysis.hpp"
#include "regraph/error.hpp"

using namespace regraph;

TEST_CASE("hypergeometric mean is exact") {
  CHECK(hypergeom_mean(10, 5, 4) == Rational(2));
  CHECK(hypergeom_mean(7, 7, 3) == Rational(3));
  CHECK(hypergeom_mean(9, 2, 3) == Rational(2, 3));
  CHECK_THROWS_AS(hypergeom_mean(5, 6, 1), Error);
}

TEST_CASE("hypergeometric sampler edge cases and law") {
  RandomSource rng(1);
  CHECK(hypergeom_sample(10, 5, 0, rng) == 0);
  CHECK(hypergeom_sample(10, 0, 7, rng) == 0);
  CHECK(hypergeom_sample(10, 10, 7, rng) == 7);

  double total = 0.0;
  for (std::uint64_t k = 0; k <= 6; ++k) total += hypergeom_pmf(20, 8, 6, k);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  // C(8,2) C(12,4) / C(20,6) = 28 * 495 / 38760
  CHECK(hypergeom_pmf(20, 8, 6, 2) == doctest::Approx(28.0 * 495.0 / 38760.0).epsilon(1e-12));

  const int samples = 40000;
  std::vector<double> observed(7, 0.0), expected(7, 0.0);
  for (int i = 0; i < samples; ++i) observed[hypergeom_sample(20, 8, 6, rng)] += 1.0;
  for (std::uint64_t k = 0; k <= 6; ++k) expected[k] = samples * hypergeom_pmf(20, 8, 6, k);
  CHECK(chi_square(observed, expected).p_value > 1e-3);
}

TEST_CASE("chi-square statistic, pooling and p-value") {
  const std::vector<double> obs{10, 20, 30}, exp{20, 20, 20};
  const ChiSquare r = chi_square(obs, exp);
  CHECK(r.statistic == doctest::Approx(10.0));
  CHECK(r.dof == 2);
  CHECK(r.p_value == doctest::Approx(std::exp(-5.0)).epsilon(1e-9));

  // Cells expecting 1 and 2 merge into one of 3; the 3 merges forward too.
  const std::vector<double> o2{1, 2, 3, 10}, e2{1, 2, 3, 10};
  const ChiSquare p = chi_square(o2, e2);
  CHECK(p.dof == 1);
  CHECK(p.statistic == doctest::Approx(0.0));
  CHECK_THROWS_AS(chi_square(obs, e2), Error);
}

TEST_CASE("conditional hypergeometric test accepts true draws") {
  RandomSource rng(5);
  std::vector<HypergeomObservation> obs;
  for (int i = 0; i < 5000; ++i) {
    HypergeomObservation o{50 + rng.below(50), 0, 0, 0};
    o.successes = rng.below(o.pop + 1);
    o.draws = rng.below(o.pop + 1);
    o.observed = hypergeom_sample(o.pop, o.successes, o.draws, rng);
    obs.push_back(o);
  }
  CHECK(conditional_hypergeom_test(obs).p_value > 1e-3);
  for (auto& o : obs) o.observed = std::min(o.draws, o.successes);  // maximal, clearly not hypergeometric
  CHECK(conditional_hypergeom_test(obs).p_value < 1e-6);
}

TEST_CASE("closed-form bounds") {
  CHECK(binary_tree_bound(100000, 6) == doctest::Approx(1.0 - 6.0 * 4096.0 / (100000.0 - 64.0)));
  const double n = 1e5;
  CHECK(expansion_bound(100000, 0.1) == doctest::Approx(1.0 - 2.2 * std::log2(n) / std::cbrt(n)));
}

TEST_CASE("expansion statistics of a grown network") {
  const Network net = grow_network(2, 20000, RandomSource(3));
  const RfaState s = compute_rfa(net, 0.5, RandomSource(4));
  const ExpansionStats st = measure_expansion(net, s);
  CHECK(st.dstar == s.dstar);
  const DepthHistogram h = depth_histogram(s);
  for (int d = 0; d <= st.dstar; ++d) {
    CHECK(st.count[static_cast<std::size_t>(d)] == h.at(d));
    if (d > 0) CHECK(st.layer1[static_cast<std::size_t>(d)] + st.layer2[static_cast<std::size_t>(d)] == st.count[static_cast<std::size_t>(d)]);
  }
  const TheoryBounds tb = theory_bounds(st);
  CHECK(tb.d1 == static_cast<int>(std::ceil(std::log2(20000.0) / 3.0)));
  CHECK(tb.d2 == static_cast<int>(std::ceil(5.0 * std::log2(20000.0) / 6.0)));
  for (int d = 0; d < tb.d1 && d < st.dstar; ++d) CHECK(tb.phi[static_cast<std::size_t>(d)] == 1.0);
  // In the binary region every depth-d peer was reached over both layers' edges from N_{d-1}.
  if (is_binary_up_to(st, tb.d1)) {
    for (int d = 1; d <= tb.d1; ++d) {
      CHECK(st.layer1[static_cast<std::size_t>(d)] == st.count[static_cast<std::size_t>(d - 1)]);
      CHECK(st.layer2[static_cast<std::size_t>(d)] == st.count[static_cast<std::size_t>(d - 1)]);
      CHECK(st.flow1[static_cast<std::size_t>(d)] * 2 == st.count[static_cast<std::size_t>(d)]);
    }
    CHECK(check_expansion_event(st, tb, 0.1).growth);
  }
  CHECK(half_split_deviation(st) >= 0.0);
  CHECK(expected_next_depth(st, 0) == doctest::Approx(2.0 * (20000 - 1) / 20000.0 - (20000 - 1) / (20000.0 * 20000.0)));
  CHECK_THROWS_AS(measure_expansion(grow_network(3, 30, RandomSource(1)),
                                    compute_rfa(grow_network(3, 30, RandomSource(1)), 0.5, RandomSource(2))),
                  Error);
}

TEST_CASE("gamma sequence continues past its end") {
  ContractionStats cs;
  cs.n = 100;
  cs.shell = {40, 30, 30};
  cs.remaining = {60, 30, 0};
  cs.gamma = {0.0, 0.5, 0.0};
  CHECK_FALSE(gamma_at(cs, 0).has_value());
  CHECK(*gamma_at(cs, 1) == doctest::Approx(0.5));
  CHECK(*gamma_at(cs, 2) == doctest::Approx(0.0));
  CHECK_FALSE(gamma_at(cs, 3).has_value());
  CHECK(*remaining_at(cs, 5) == 0);

  ContractionStats stuck = cs;
  stuck.shell = {40, 30};
  stuck.remaining = {60, 30};
  stuck.gamma = {0.0, 0.5};
  CHECK(*gamma_at(stuck, 4) == 1.0);
  CHECK(*remaining_at(stuck, 4) == 30);
}

TEST_CASE("permutation ranks") {
  const std::vector<std::uint32_t> id{1, 2, 3}, rev{3, 2, 1}, mid{2, 1, 3};
  CHECK(permutation_rank(id) == 0);
  CHECK(permutation_rank(rev) == 5);
  CHECK(permutation_rank(mid) == 2);
}

TEST_CASE("uniformity check accepts the join process") {
  const UniformityReport r31 = check_uniformity(1, 3, 60000, RandomSource(1));
  CHECK(r31.pass);
  CHECK(r31.exact_checked);
  CHECK(r31.worst_z <= 3.0);
  const UniformityReport r22 = check_uniformity(2, 2, 20000, RandomSource(2));
  CHECK(r22.pass);
  CHECK(r22.pairwise.size() == 1);
  CHECK(check_uniformity(2, 1, 10, RandomSource(3)).pass);
  CHECK_THROWS_AS(check_uniformity(1, 9, 10, RandomSource(3)), Error);
}

TEST_CASE("contraction checks run on small replicas") {
  const auto stats = collect_contraction(2000, 20, 9, 0.5);
  CHECK(stats.size() == 20);
  const ContractionReport rep = check_contraction(stats, 0.5, ContractionOptions{});
  CHECK(rep.rows.size() == 10);
  CHECK(rep.hstar_limit == doctest::Approx(1.2 * std::log(2000.0)));
}
