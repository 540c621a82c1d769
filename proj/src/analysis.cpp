#include "regraph/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>

#include "regraph/error.hpp"

namespace regraph {
namespace {

void check_urn(std::uint64_t pop, std::uint64_t successes, std::uint64_t draws) {
  if (successes > pop || draws > pop) {
    fail(Errc::parameter_out_of_range, "hypergeometric needs successes <= pop and draws <= pop");
  }
}

long double log_choose(std::uint64_t n, std::uint64_t k) {
  const auto nl = static_cast<long double>(n);
  const auto kl = static_cast<long double>(k);
  return std::lgamma(nl + 1.0L) - std::lgamma(kl + 1.0L) - std::lgamma(nl - kl + 1.0L);
}

double chi_square_tail(double statistic, int dof) {
  if (dof <= 0) return 1.0;
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, std::max(0.0, statistic)));
}

std::uint64_t factorial(int n) {
  std::uint64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace

Rational hypergeom_mean(std::uint64_t pop, std::uint64_t successes, std::uint64_t draws) {
  check_urn(pop, successes, draws);
  if (pop == 0) return Rational(0);
  return Rational(static_cast<std::int64_t>(draws * successes), static_cast<std::int64_t>(pop));
}

std::uint64_t hypergeom_sample(std::uint64_t pop, std::uint64_t successes, std::uint64_t draws,
                               RandomSource& rng) {
  check_urn(pop, successes, draws);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < draws; ++i) {
    if (rng.below(pop) < successes) {
      ++hits;
      --successes;
    }
    --pop;
  }
  return hits;
}

double hypergeom_pmf(std::uint64_t pop, std::uint64_t successes, std::uint64_t draws, std::uint64_t k) {
  check_urn(pop, successes, draws);
  if (k > draws || k > successes || draws - k > pop - successes) return 0.0;
  const long double lp = log_choose(successes, k) + log_choose(pop - successes, draws - k) - log_choose(pop, draws);
  return static_cast<double>(std::exp(lp));
}

ChiSquare chi_square(std::span<const double> observed, std::span<const double> expected, double min_expected) {
  if (observed.size() != expected.size()) fail(Errc::invalid_parameter, "chi-square cell count mismatch");
  std::vector<std::pair<double, double>> cells;
  double obs = 0.0, exp = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    obs += observed[i];
    exp += expected[i];
    if (exp >= min_expected) {
      cells.emplace_back(obs, exp);
      obs = exp = 0.0;
    }
  }
  if (exp > 0.0 || obs > 0.0) {
    if (cells.empty()) cells.emplace_back(obs, exp);
    else {
      cells.back().first += obs;
      cells.back().second += exp;
    }
  }
  ChiSquare r;
  r.dof = static_cast<int>(cells.size()) - 1;
  if (r.dof <= 0) return r;
  for (const auto& [o, e] : cells) {
    if (e > 0.0) r.statistic += (o - e) * (o - e) / e;
    else if (o > 0.0) r.statistic = std::numeric_limits<double>::infinity();
  }
  r.p_value = chi_square_tail(r.statistic, r.dof);
  return r;
}

ChiSquare conditional_hypergeom_test(std::span<const HypergeomObservation> obs) {
  std::uint64_t widest = 0;
  for (const auto& o : obs) widest = std::max(widest, o.draws);
  std::vector<double> observed(widest + 1, 0.0);
  std::vector<double> expected(widest + 1, 0.0);
  for (const auto& o : obs) {
    check_urn(o.pop, o.successes, o.draws);
    if (o.observed > o.draws) fail(Errc::parameter_out_of_range, "observed successes exceed draws");
    observed[o.draws - o.observed] += 1.0;
    const std::uint64_t lo = o.draws > o.pop - o.successes ? o.draws - (o.pop - o.successes) : 0;
    const std::uint64_t hi = std::min(o.draws, o.successes);
    for (std::uint64_t k = lo; k <= hi; ++k) expected[o.draws - k] += hypergeom_pmf(o.pop, o.successes, o.draws, k);
  }
  return chi_square(observed, expected);
}

// ---- expansion ----

std::uint64_t ExpansionStats::within(int d) const {
  std::uint64_t sum = 0;
  for (int i = 0; i <= d && i < static_cast<int>(count.size()); ++i) sum += count[static_cast<std::size_t>(i)];
  return sum;
}

ExpansionStats measure_expansion(const Network& net, const RfaState& state) {
  if (state.flows != 2) fail(Errc::analysis_limited_to_two_flows, "expansion statistics need M = 2");
  ExpansionStats st;
  st.n = net.size();
  st.c = state.c;
  st.dstar = state.dstar;
  const auto depths = static_cast<std::size_t>(state.dstar) + 1;
  st.count.assign(depths, 0);
  st.layer1.assign(depths, 0);
  st.layer2.assign(depths, 0);
  st.flow1.assign(depths, 0);
  for (PeerId v : net.members()) {
    const int d = state.depth_of(v);
    if (d < 0) continue;
    const auto di = static_cast<std::size_t>(d);
    ++st.count[di];
    if (state.flow_of(v) == 1) ++st.flow1[di];
    if (d == 0) continue;
    if (state.depth_of(net.parent(0, v)) == d - 1) ++st.layer1[di];
    else ++st.layer2[di];
  }
  return st;
}

TheoryBounds theory_bounds(const ExpansionStats& st) {
  TheoryBounds b;
  const double n = static_cast<double>(st.n);
  const double lg = std::log2(n);
  b.d1 = static_cast<int>(std::ceil(lg / 3.0));
  b.d2 = static_cast<int>(std::ceil(5.0 * lg / 6.0));
  b.dstar = st.dstar;
  b.regimes_ordered = b.d1 < b.d2 && b.d2 <= b.dstar;
  for (int d = 0; d < st.dstar; ++d) {
    const double nd = static_cast<double>(st.count[static_cast<std::size_t>(d)]);
    const double pool = static_cast<double>(st.above(d - 1));
    double phi = 1.0;
    if (d >= b.d2) phi = std::pow(1.0 - nd / pool, 3.0);
    else if (d >= b.d1) phi = 1.0 - std::pow(n, -1.0 / 9.0);
    b.phi.push_back(phi);
    b.sigma.push_back(1.0 - 2.0 * nd / pool - phi);
  }
  return b;
}

bool is_binary_up_to(const ExpansionStats& st, int d) {
  for (int h = 1; h <= d; ++h) {
    if (h >= static_cast<int>(st.count.size())) return false;
    if (st.count[static_cast<std::size_t>(h)] != 2 * st.count[static_cast<std::size_t>(h - 1)]) return false;
  }
  return true;
}

double binary_tree_bound(std::uint64_t n, int d) {
  const double two_d = std::ldexp(1.0, d);
  return 1.0 - d * two_d * two_d / (static_cast<double>(n) - two_d);
}

double expansion_bound(std::uint64_t n, double eps) {
  const double nd = static_cast<double>(n);
  return 1.0 - 2.0 * (1.0 + eps) * std::log2(nd) / std::cbrt(nd);
}

ExpansionEvent check_expansion_event(const ExpansionStats& st, const TheoryBounds& b, double eps) {
  ExpansionEvent ev;
  ev.growth = true;
  for (int d = 1; d <= st.dstar; ++d) {
    const double need = 2.0 * b.phi[static_cast<std::size_t>(d - 1)] * static_cast<double>(st.count[static_cast<std::size_t>(d - 1)]);
    if (static_cast<double>(st.count[static_cast<std::size_t>(d)]) < need) {
      ev.growth = false;
      break;
    }
  }
  const double n = static_cast<double>(st.n);
  const double mass = (1.0 - eps) * n / std::pow(std::log(n), st.c);
  ev.mass = static_cast<double>(st.count.back()) >= mass;
  return ev;
}

double half_split_deviation(const ExpansionStats& st) {
  double worst = 0.0;
  for (std::size_t d = 1; d < st.count.size(); ++d) {
    if (st.count[d] == 0) continue;
    const double share = static_cast<double>(st.flow1[d]) / static_cast<double>(st.count[d]);
    worst = std::max(worst, std::abs(share - 0.5));
  }
  return worst;
}

bool check_half_split(const ExpansionStats& st, double eps) { return half_split_deviation(st) < eps; }

void hypergeom_observations(const ExpansionStats& st, int d, HypergeomObservation& first,
                            HypergeomObservation& second) {
  if (d < 0 || d >= st.dstar) fail(Errc::invalid_parameter, "depth outside 0..d*-1");
  const auto next = static_cast<std::size_t>(d + 1);
  const std::uint64_t pool = st.above(d - 1);
  const std::uint64_t fresh = st.above(d);
  const std::uint64_t draws = st.count[static_cast<std::size_t>(d)];
  first = {pool, fresh, draws, st.layer1[next]};
  second = {pool, fresh - st.layer1[next], draws, st.layer2[next]};
}

double expected_next_depth(const ExpansionStats& st, int d) {
  const double pool = static_cast<double>(st.above(d - 1));
  const double fresh = static_cast<double>(st.above(d));
  const double nd = static_cast<double>(st.count[static_cast<std::size_t>(d)]);
  return 2.0 * fresh * nd / pool - fresh * nd * nd / (pool * pool);
}

// ---- contraction ----

std::optional<double> gamma_at(const ContractionStats& st, int h) {
  if (h < 1) return std::nullopt;
  const auto hs = static_cast<std::size_t>(h);
  if (hs < st.gamma.size()) {
    if (st.remaining[hs - 1] == 0) return std::nullopt;
    return st.gamma[hs];
  }
  if (st.remaining.empty() || st.remaining.back() == 0) return std::nullopt;
  return 1.0;
}

std::optional<std::uint64_t> remaining_at(const ContractionStats& st, int h) {
  if (h < 0 || st.remaining.empty()) return std::nullopt;
  const auto hs = static_cast<std::size_t>(h);
  return hs < st.remaining.size() ? st.remaining[hs] : st.remaining.back();
}

std::optional<bool> gamma1_bound_holds(const ContractionStats& st, double c, double eps) {
  if (st.shell.size() < 2 || st.gamma.size() < 2) return std::nullopt;
  const double n = static_cast<double>(st.n);
  const double lc = std::pow(std::log(n), c);
  if (static_cast<double>(st.shell[1]) < n * (1.0 - eps) / (2.0 * lc)) return std::nullopt;
  const auto g1 = gamma_at(st, 1);
  if (!g1) return std::nullopt;
  return *g1 <= 1.0 - 1.0 / lc;
}

ContractionReport check_contraction(std::span<const ContractionStats> stats, double c,
                                    const ContractionOptions& opt) {
  ContractionReport rep;
  rep.martingale_ok = true;
  rep.step_ok = true;
  for (int h = 1; h <= opt.max_h; ++h) {
    ContractionRow row;
    row.h = h;
    std::vector<double> inc;
    double hits = 0.0, bound = 0.0;
    for (const auto& st : stats) {
      const auto g = gamma_at(st, h);
      const auto g_next = gamma_at(st, h + 1);
      if (!g || !g_next) continue;
      inc.push_back(*g_next - *g);
      if (*g_next <= *g + opt.eps) hits += 1.0;
      const double rest = static_cast<double>(*remaining_at(st, h));
      bound += 1.0 - 2.0 * std::exp(-opt.eps * opt.eps * rest / 2.0);
    }
    row.samples = inc.size();
    if (!inc.empty()) {
      const double n = static_cast<double>(inc.size());
      row.mean_increment = std::accumulate(inc.begin(), inc.end(), 0.0) / n;
      double ss = 0.0;
      for (double x : inc) ss += (x - row.mean_increment) * (x - row.mean_increment);
      row.std_error = inc.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
      row.step_frequency = hits / n;
      row.step_bound = bound / n;
    }
    row.martingale_ok = inc.size() < 2 || std::abs(row.mean_increment) <= opt.z * row.std_error;
    row.step_ok = inc.empty() || row.step_frequency >= row.step_bound - opt.margin;
    rep.martingale_ok = rep.martingale_ok && row.martingale_ok;
    rep.step_ok = rep.step_ok && row.step_ok;
    rep.rows.push_back(row);
  }

  if (!stats.empty()) {
    rep.hstar_limit = (1.0 + opt.hstar_eps) * std::log(static_cast<double>(stats.front().n));
    std::size_t within = 0, premise = 0, holds = 0;
    for (const auto& st : stats) {
      if (st.h_star && *st.h_star <= rep.hstar_limit) ++within;
      if (const auto g = gamma1_bound_holds(st, c, opt.eps)) {
        ++premise;
        holds += *g ? 1 : 0;
      }
    }
    rep.hstar_frequency = static_cast<double>(within) / static_cast<double>(stats.size());
    rep.gamma1_samples = premise;
    rep.gamma1_frequency = premise ? static_cast<double>(holds) / static_cast<double>(premise) : 1.0;
  }
  rep.hstar_ok = rep.hstar_frequency >= opt.hstar_level;
  return rep;
}

// ---- uniformity ----

std::uint64_t permutation_rank(std::span<const std::uint32_t> image) {
  const int n = static_cast<int>(image.size());
  std::uint64_t rank = 0;
  for (int i = 0; i < n; ++i) {
    std::uint64_t smaller = 0;
    for (int j = i + 1; j < n; ++j) smaller += image[static_cast<std::size_t>(j)] < image[static_cast<std::size_t>(i)] ? 1 : 0;
    rank += smaller * factorial(n - 1 - i);
  }
  return rank;
}

UniformityReport check_uniformity(int flows, int n, std::uint64_t samples, const RandomSource& rng, double alpha) {
  if (n < 1 || n > 5) fail(Errc::invalid_parameter, "uniformity check supports 1 <= n <= 5");
  if (flows < 1) fail(Errc::invalid_parameter, "need at least one layer");
  if (samples < 1) fail(Errc::invalid_parameter, "need at least one sample");

  UniformityReport rep;
  rep.n = n;
  rep.flows = flows;
  rep.samples = samples;
  rep.alpha = alpha;
  const std::uint64_t cells = factorial(n);
  const auto F = static_cast<std::size_t>(flows);
  const bool joint = flows >= 2 && samples >= 5 * cells * cells;

  std::vector<std::vector<double>> counts(F, std::vector<double>(cells, 0.0));
  std::vector<std::vector<double>> pair_counts;
  if (joint) pair_counts.assign(F * (F - 1) / 2, std::vector<double>(cells * cells, 0.0));

  std::vector<std::uint64_t> ranks(F);
  for (std::uint64_t s = 0; s < samples; ++s) {
    const Network net = grow_network(flows, static_cast<std::uint32_t>(n), rng.derive(s));
    for (std::size_t m = 0; m < F; ++m) {
      ranks[m] = permutation_rank(layer_image(net, static_cast<int>(m)));
      counts[m][ranks[m]] += 1.0;
    }
    if (joint) {
      std::size_t k = 0;
      for (std::size_t i = 0; i < F; ++i) {
        for (std::size_t j = i + 1; j < F; ++j) pair_counts[k++][ranks[i] * cells + ranks[j]] += 1.0;
      }
    }
  }

  const std::size_t tests = F + pair_counts.size();
  rep.corrected_alpha = alpha / static_cast<double>(tests);
  rep.pass = true;
  const std::vector<double> flat(cells, static_cast<double>(samples) / static_cast<double>(cells));
  for (const auto& c : counts) {
    rep.per_layer.push_back(chi_square(c, flat));
    rep.pass = rep.pass && rep.per_layer.back().p_value >= rep.corrected_alpha;
  }
  const std::vector<double> flat2(cells * cells,
                                  static_cast<double>(samples) / static_cast<double>(cells * cells));
  for (const auto& c : pair_counts) {
    rep.pairwise.push_back(chi_square(c, flat2));
    rep.pass = rep.pass && rep.pairwise.back().p_value >= rep.corrected_alpha;
  }

  if (n <= 4) {
    // Per-layer cell frequencies against the enumerated law.
    const int enum_flows = std::min(flows, 2);
    const auto exact = exact_layer_distribution(n, enum_flows);
    std::vector<std::vector<double>> mass(static_cast<std::size_t>(enum_flows), std::vector<double>(cells, 0.0));
    for (const auto& [tuple, p] : exact) {
      for (std::size_t m = 0; m < tuple.size(); ++m) {
        mass[m][permutation_rank(tuple[m])] += boost::rational_cast<double>(p);
      }
    }
    rep.exact_checked = true;
    const double S = static_cast<double>(samples);
    for (std::size_t m = 0; m < F; ++m) {
      const auto& pm = mass[std::min(m, mass.size() - 1)];
      for (std::uint64_t r = 0; r < cells; ++r) {
        const double p = pm[r];
        const double sd = std::sqrt(S * p * (1.0 - p));
        const double dev = std::abs(counts[m][r] - S * p);
        const double z = sd > 0.0 ? dev / sd : (dev > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        rep.worst_z = std::max(rep.worst_z, z);
      }
    }
    rep.pass = rep.pass && rep.worst_z <= 3.0;
  }
  return rep;
}

}  // namespace regraph
