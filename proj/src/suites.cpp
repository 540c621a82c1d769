#include <algorithm>
#include <cmath>
#include <set>

#include "regraph/analysis.hpp"
#include "regraph/dissemination.hpp"
#include "regraph/error.hpp"
#include "regraph/repair.hpp"

namespace regraph {

void to_json(nlohmann::json& j, const CheckResult& r) {
  j = nlohmann::json{{"check", r.check}, {"N", r.n},           {"M", r.flows},   {"params", r.params},
                     {"empirical", r.empirical}, {"bound", r.bound}, {"margin", r.margin}, {"pass", r.pass}};
}

namespace {

double frequency(std::size_t hits, std::size_t total) {
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

double hypergeom_variance(double pop, double succ, double draws) {
  if (pop <= 1.0) return 0.0;
  return draws * succ * (pop - succ) * (pop - draws) / (pop * pop * (pop - 1.0));
}

}  // namespace

std::vector<ExpansionStats> collect_expansion(std::uint64_t n, int replicas, std::uint64_t seed, double c) {
  std::vector<ExpansionStats> out;
  out.reserve(static_cast<std::size_t>(replicas));
  const RandomSource master(seed);
  for (int r = 0; r < replicas; ++r) {
    const RandomSource rep = master.derive(static_cast<std::uint64_t>(r));
    const Network net = grow_network(2, static_cast<std::uint32_t>(n), rep.derive(1));
    out.push_back(measure_expansion(net, compute_rfa(net, c, rep.derive(2))));
  }
  return out;
}

std::vector<ContractionStats> collect_contraction(std::uint64_t n, int replicas, std::uint64_t seed, double c) {
  std::vector<ContractionStats> out;
  out.reserve(static_cast<std::size_t>(replicas));
  const RandomSource master(seed);
  for (int r = 0; r < replicas; ++r) {
    const RandomSource rep = master.derive(static_cast<std::uint64_t>(r));
    const Network net = grow_network(2, static_cast<std::uint32_t>(n), rep.derive(1));
    const RfaState state = compute_rfa(net, c, rep.derive(2));
    out.push_back(contraction_stats(net, state, build_flow_graph(net, state, 1)));
  }
  return out;
}

// ---- uniformity ----

std::vector<CheckResult> verify_uniformity(const SuiteConfig& cfg) {
  std::vector<std::pair<int, int>> grid;  // (n, flows)
  if (cfg.n == 0) {
    for (int n = 1; n <= 4; ++n) {
      for (int m = 1; m <= 2; ++m) grid.emplace_back(n, m);
    }
  } else {
    grid.emplace_back(static_cast<int>(cfg.n), cfg.flows);
  }
  const auto samples = static_cast<std::uint64_t>(cfg.replicas > 0 ? cfg.replicas : 60000);
  const RandomSource master(cfg.seed);

  std::vector<CheckResult> out;
  for (const auto& [n, m] : grid) {
    if (n <= 4 && m <= 2) {
      // Every draw sequence is equally likely, so uniformity means one
      // mass shared by all (n!)^m tuples.
      const auto exact = exact_layer_distribution(n, m);
      std::uint64_t perms = 1;
      for (int i = 2; i <= n; ++i) perms *= static_cast<std::uint64_t>(i);
      std::uint64_t tuples = 1;
      for (int i = 0; i < m; ++i) tuples *= perms;
      const Rational share(1, static_cast<std::int64_t>(tuples));
      const bool equal = exact.size() == tuples &&
                         std::all_of(exact.begin(), exact.end(), [&](const auto& kv) { return kv.second == share; });
      CheckResult r{"exact-uniform", static_cast<std::uint64_t>(n), m};
      r.params = {{"outcomes", exact.size()}, {"expected_outcomes", tuples}};
      r.empirical = static_cast<double>(exact.size());
      r.bound = static_cast<double>(tuples);
      r.pass = equal;
      out.push_back(r);
    }

    const auto rep = check_uniformity(m, n, samples, master.derive(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(m)),
                                      cfg.alpha);
    double min_p = 1.0;
    for (const auto& t : rep.per_layer) min_p = std::min(min_p, t.p_value);
    for (const auto& t : rep.pairwise) min_p = std::min(min_p, t.p_value);
    CheckResult chi{"layer-chi-square", static_cast<std::uint64_t>(n), m};
    chi.params = {{"samples", samples}, {"alpha", cfg.alpha}, {"pairwise_tests", rep.pairwise.size()}};
    chi.empirical = min_p;
    chi.bound = rep.corrected_alpha;
    chi.pass = min_p >= rep.corrected_alpha;
    out.push_back(chi);
    if (rep.exact_checked) {
      CheckResult z{"exact-frequency-3sigma", static_cast<std::uint64_t>(n), m};
      z.params = {{"samples", samples}};
      z.empirical = rep.worst_z;
      z.bound = 3.0;
      z.pass = rep.worst_z <= 3.0;
      out.push_back(z);
    }
  }
  return out;
}

// ---- expansion ----

std::vector<CheckResult> expansion_checks(std::span<const ExpansionStats> stats, const SuiteConfig& cfg,
                                          std::optional<double> event_level) {
  std::vector<CheckResult> out;
  if (stats.empty()) return out;
  const std::uint64_t n = stats.front().n;
  const auto base = [&](const char* name) {
    CheckResult r{name, n, 2};
    r.params = {{"replicas", stats.size()}, {"c", cfg.c}, {"eps", cfg.eps}, {"seed", cfg.seed}};
    r.margin = cfg.margin;
    return r;
  };

  // Per-replica identities first: N_0 = 1, N_d = N'_d + N''_d.
  bool identity = true;
  for (const auto& s : stats) {
    identity = identity && !s.count.empty() && s.count[0] == 1;
    for (std::size_t d = 1; d < s.count.size(); ++d) identity = identity && s.count[d] == s.layer1[d] + s.layer2[d];
  }
  {
    auto r = base("depth-split-identity");
    r.empirical = identity ? 1.0 : 0.0;
    r.bound = 1.0;
    r.margin = 0.0;
    r.pass = identity;
    out.push_back(r);
  }

  const TheoryBounds tb = theory_bounds(stats.front());
  std::size_t binary = 0, growth = 0, mass = 0, both = 0;
  for (const auto& s : stats) {
    const TheoryBounds b = theory_bounds(s);
    binary += is_binary_up_to(s, b.d1) ? 1 : 0;
    const ExpansionEvent ev = check_expansion_event(s, b, cfg.eps);
    growth += ev.growth ? 1 : 0;
    mass += ev.mass ? 1 : 0;
    both += ev.holds() ? 1 : 0;
  }
  {
    auto r = base("binary-prefix");
    r.params["d1"] = tb.d1;
    r.empirical = frequency(binary, stats.size());
    r.bound = binary_tree_bound(n, tb.d1) - cfg.margin;
    r.pass = r.empirical >= r.bound;
    out.push_back(r);
  }
  if (!tb.regimes_ordered) {
    auto r = base("expansion-event");
    r.params["skipped"] = "d1 < d2 <= d* fails at this N";
    r.params["d1"] = tb.d1;
    r.params["d2"] = tb.d2;
    r.params["dstar"] = tb.dstar;
    r.pass = true;
    out.push_back(r);
  } else {
    auto r = base("expansion-event");
    r.params["d1"] = tb.d1;
    r.params["d2"] = tb.d2;
    r.params["dstar"] = tb.dstar;
    r.params["growth_frequency"] = frequency(growth, stats.size());
    r.params["mass_frequency"] = frequency(mass, stats.size());
    r.params["asymptotic_bound"] = expansion_bound(n, cfg.eps);
    r.empirical = frequency(both, stats.size());
    if (event_level) {
      r.bound = *event_level;
      r.margin = 0.0;
    } else {
      r.bound = expansion_bound(n, cfg.eps) - cfg.margin;
    }
    r.pass = r.empirical >= r.bound;
    out.push_back(r);
  }

  // Conditional laws of N'_{d+1} and N''_{d+1}, one chi-square per depth
  // and kind, Bonferroni over all of them.
  const int dstar = stats.front().dstar;
  const double corrected = cfg.alpha / static_cast<double>(std::max(1, 2 * dstar));
  for (int kind = 0; kind < 2; ++kind) {
    auto r = base(kind == 0 ? "hypergeom-layer1" : "hypergeom-layer2");
    double min_p = 1.0;
    nlohmann::json per_depth = nlohmann::json::array();
    for (int d = 0; d < dstar; ++d) {
      std::vector<HypergeomObservation> obs;
      for (const auto& s : stats) {
        HypergeomObservation a, b;
        hypergeom_observations(s, d, a, b);
        obs.push_back(kind == 0 ? a : b);
      }
      const ChiSquare t = conditional_hypergeom_test(obs);
      per_depth.push_back({{"d", d}, {"statistic", t.statistic}, {"dof", t.dof}, {"p", t.p_value}});
      min_p = std::min(min_p, t.p_value);
    }
    r.params["alpha"] = cfg.alpha;
    r.params["depths"] = per_depth;
    r.empirical = min_p;
    r.bound = corrected;
    r.margin = 0.0;
    r.pass = min_p >= corrected;
    out.push_back(r);
  }

  // E[N_{d+1} | history]: pooled z over replicas, per depth.
  {
    auto r = base("mean-next-depth");
    double worst = 0.0;
    nlohmann::json per_depth = nlohmann::json::array();
    for (int d = 0; d < dstar; ++d) {
      double diff = 0.0, var = 0.0;
      for (const auto& s : stats) {
        const double pool = static_cast<double>(s.above(d - 1));
        const double fresh = static_cast<double>(s.above(d));
        const double nd = static_cast<double>(s.count[static_cast<std::size_t>(d)]);
        diff += static_cast<double>(s.count[static_cast<std::size_t>(d + 1)]) - expected_next_depth(s, d);
        const double first_mean = nd * fresh / pool;
        var += (1.0 - nd / pool) * (1.0 - nd / pool) * hypergeom_variance(pool, fresh, nd) +
               hypergeom_variance(pool, fresh - first_mean, nd);
      }
      const double z = var > 0.0 ? diff / std::sqrt(var) : (diff == 0.0 ? 0.0 : INFINITY);
      per_depth.push_back({{"d", d}, {"z", z}});
      worst = std::max(worst, std::abs(z));
    }
    r.params["depths"] = per_depth;
    r.empirical = worst;
    r.bound = 3.0;
    r.margin = 0.0;
    r.pass = worst <= 3.0;
    out.push_back(r);
  }
  return out;
}

std::vector<CheckResult> half_split_checks(std::span<const ExpansionStats> stats, const SuiteConfig& cfg,
                                           double split_eps, double level) {
  std::vector<CheckResult> out;
  if (stats.empty()) return out;
  std::size_t hits = 0;
  double worst = 0.0;
  for (const auto& s : stats) {
    hits += check_half_split(s, split_eps) ? 1 : 0;
    worst = std::max(worst, half_split_deviation(s));
  }
  CheckResult r{"half-split", stats.front().n, 2};
  r.params = {{"replicas", stats.size()}, {"split_eps", split_eps}, {"worst_deviation", worst},
              {"c", cfg.c}, {"seed", cfg.seed}};
  r.empirical = frequency(hits, stats.size());
  r.bound = level;
  r.pass = r.empirical >= level;
  out.push_back(r);
  return out;
}

std::vector<CheckResult> contraction_checks(std::span<const ContractionStats> stats, const SuiteConfig& cfg,
                                            const ContractionOptions& opt) {
  std::vector<CheckResult> out;
  if (stats.empty()) return out;
  const ContractionReport rep = check_contraction(stats, cfg.c, opt);
  const std::uint64_t n = stats.front().n;
  for (const auto& row : rep.rows) {
    CheckResult m{"gamma-martingale", n, 2};
    m.params = {{"h", row.h}, {"samples", row.samples}, {"mean_increment", row.mean_increment},
                {"std_error", row.std_error}};
    m.empirical = row.std_error > 0.0 ? std::abs(row.mean_increment) / row.std_error : 0.0;
    m.bound = opt.z;
    m.pass = row.martingale_ok;
    out.push_back(m);

    CheckResult s{"gamma-step", n, 2};
    s.params = {{"h", row.h}, {"samples", row.samples}, {"eps", opt.eps}};
    s.empirical = row.step_frequency;
    s.bound = row.step_bound - opt.margin;
    s.margin = opt.margin;
    s.pass = row.step_ok;
    out.push_back(s);
  }
  CheckResult h{"hstar", n, 2};
  h.params = {{"limit", rep.hstar_limit}, {"hstar_eps", opt.hstar_eps}, {"replicas", stats.size()}};
  h.empirical = rep.hstar_frequency;
  h.bound = opt.hstar_level;
  h.pass = rep.hstar_ok;
  out.push_back(h);

  CheckResult g{"gamma1-bound", n, 2};
  g.params = {{"premise_replicas", rep.gamma1_samples}, {"c", cfg.c}};
  g.empirical = rep.gamma1_frequency;
  g.bound = 1.0 - opt.margin;
  g.margin = opt.margin;
  g.pass = rep.gamma1_samples == 0 || rep.gamma1_frequency >= g.bound;
  out.push_back(g);
  return out;
}

std::vector<CheckResult> verify_expansion(const SuiteConfig& cfg) {
  const auto stats = collect_expansion(cfg.n, cfg.replicas, cfg.seed, cfg.c);
  return expansion_checks(stats, cfg);
}

std::vector<CheckResult> verify_half_split(const SuiteConfig& cfg, double split_eps, double level) {
  const auto stats = collect_expansion(cfg.n, cfg.replicas, cfg.seed, cfg.c);
  return half_split_checks(stats, cfg, split_eps, level);
}

std::vector<CheckResult> verify_contraction(const SuiteConfig& cfg, const ContractionOptions& opt) {
  const auto stats = collect_contraction(cfg.n, cfg.replicas, cfg.seed, cfg.c);
  return contraction_checks(stats, cfg, opt);
}

// ---- delay ----

bool decomposition_is_partition(const FlowGraph& fg, const Decomposition& dec) {
  std::set<PeerId> seen;
  auto once = [&](PeerId v) { return seen.insert(v).second; };
  if (dec.tree.empty() || !std::binary_search(dec.tree.begin(), dec.tree.end(), kSource)) return false;
  if (dec.distance_of(kSource) != 0) return false;
  for (PeerId v : dec.tree) {
    if (!once(v)) return false;
    if (v == kSource) continue;
    const PeerId p = fg.incoming(v).parent;
    if (dec.distance_of(p) < 0 || dec.distance_of(v) != dec.distance_of(p) + 1) return false;
  }
  for (const auto& comp : dec.cycles) {
    if (comp.cycle.empty()) return false;
    std::set<PeerId> members(comp.cycle.begin(), comp.cycle.end());
    for (std::size_t i = 0; i < comp.cycle.size(); ++i) {
      const PeerId v = comp.cycle[(i + 1) % comp.cycle.size()];
      if (!once(v) || dec.distance_of(v) != kUnreachable) return false;
      if (fg.incoming(v).parent != comp.cycle[i]) return false;
    }
    members.insert(comp.hanging.begin(), comp.hanging.end());
    for (PeerId v : comp.hanging) {
      if (!once(v) || dec.distance_of(v) != kUnreachable) return false;
      if (!members.count(fg.incoming(v).parent)) return false;
    }
  }
  return seen.size() == fg.peers.size() &&
         std::all_of(fg.peers.begin(), fg.peers.end(), [&](PeerId v) { return seen.count(v) == 1; });
}

std::vector<CheckResult> verify_delay(const SuiteConfig& cfg) {
  const int instances = cfg.replicas > 0 ? cfg.replicas : 50;
  const RandomSource master(cfg.seed);
  std::size_t partitions = 0, flow_graphs = 0, checked = 0, mismatches = 0, rate_violations = 0;
  std::size_t conservation = 0;
  nlohmann::json sizes = nlohmann::json::array();
  for (int i = 0; i < instances; ++i) {
    RandomSource rng = master.derive(static_cast<std::uint64_t>(i));
    const auto n = static_cast<std::uint32_t>(cfg.n > 0 ? cfg.n : 10 + rng.below(991));
    const int flows = rng.below(2) ? 4 : 2;
    sizes.push_back({n, flows});
    const Network net = grow_network(flows, n, rng.derive(1));
    const RfaState state = compute_rfa(net, cfg.c, rng.derive(2));
    std::vector<Decomposition> decs;
    for (int f = 1; f <= flows; ++f) {
      const FlowGraph fg = build_flow_graph(net, state, f);
      decs.push_back(decompose(fg));
      ++flow_graphs;
      partitions += decomposition_is_partition(fg, decs.back()) ? 1 : 0;
    }
    const DelayTable table = distance_delay_table(net, decs);
    const DeliveryLog log = simulate(net, state, 2 * (table.max_delay + 1) + 8);
    const DelayReport rep = verify_delay_equals_distance(log, table);
    checked += rep.checked;
    mismatches += rep.mismatches.size();
    rate_violations += rep.rate_violations;
    conservation += log.duplicates + log.mislabeled;
  }

  std::vector<CheckResult> out;
  CheckResult part{"decomposition-partition", cfg.n, 0};
  part.params = {{"instances", instances}, {"flow_graphs", flow_graphs}, {"sizes", sizes}};
  part.empirical = frequency(partitions, flow_graphs);
  part.bound = 1.0;
  part.pass = partitions == flow_graphs;
  out.push_back(part);

  CheckResult delay{"delay-equals-distance", cfg.n, 0};
  delay.params = {{"instances", instances}, {"pairs_checked", checked}, {"rate_violations", rate_violations},
                  {"duplicates_or_mislabeled", conservation}};
  delay.empirical = static_cast<double>(mismatches);
  delay.bound = 0.0;
  delay.pass = mismatches == 0 && rate_violations == 0 && conservation == 0 && checked > 0;
  out.push_back(delay);
  return out;
}

// ---- properties ----

std::vector<CheckResult> verify_properties(const SuiteConfig& cfg) {
  const std::uint64_t events = cfg.n > 0 ? cfg.n : 10000;
  const int flows = cfg.flows;
  const RandomSource master(cfg.seed);
  const RandomSource joins = master.derive(1);
  RandomSource coin = master.derive(4);

  // Script: leaves at rate 0.4 once a few peers exist.
  std::vector<ChurnStep> script;
  {
    std::vector<std::uint32_t> alive;
    std::uint32_t next = 2;
    for (std::uint64_t e = 0; e < events; ++e) {
      if (alive.size() > 2 && coin.uniform() < 0.4) {
        const auto i = coin.below(alive.size());
        script.push_back({ChurnKind::leave, peer(alive[i])});
        alive[i] = alive.back();
        alive.pop_back();
      } else {
        script.push_back({ChurnKind::join, kNoPeer});
        alive.push_back(next++);
      }
    }
  }

  std::size_t structural = 0, structural_bad = 0;
  std::size_t snapshots = 0, fixpoint_bad = 0, partition_bad = 0, conservation_bad = 0, delay_bad = 0;
  Network net(flows);
  for (std::size_t e = 0; e < script.size(); ++e) {
    apply_churn(net, std::span(&script[e], 1), joins);
    ++structural;
    try {
      net.check_invariants();
    } catch (const Error&) {
      ++structural_bad;
    }
    if ((e + 1) % 500 != 0) continue;
    ++snapshots;
    const RfaState state = compute_rfa(net, cfg.c, master.derive(2, e));
    fixpoint_bad += is_local_fixpoint(net, state) ? 0 : 1;
    std::vector<Decomposition> decs;
    for (int f = 1; f <= flows; ++f) {
      const FlowGraph fg = build_flow_graph(net, state, f);
      decs.push_back(decompose(fg));
      partition_bad += decomposition_is_partition(fg, decs.back()) ? 0 : 1;
    }
    const DelayTable table = distance_delay_table(net, decs);
    const DeliveryLog log = simulate(net, state, 2 * (table.max_delay + 1));
    // Every transmission is either a first delivery or counted as a fault.
    std::uint64_t delivered = 0;
    for (PeerId v : log.peers) {
      if (v == kSource) continue;
      for (int f = 1; f <= flows; ++f) {
        for (int seq = 0; seq < log.slots; ++seq) delivered += log.rx_slot(v, f, seq) >= 0 ? 1 : 0;
      }
    }
    conservation_bad +=
        (log.duplicates || log.mislabeled || delivered + log.duplicates + log.mislabeled != log.transmissions) ? 1 : 0;
    delay_bad += verify_delay_equals_distance(log, table).ok() ? 0 : 1;
  }

  // Replay: same script and seed give the same network and assignment.
  Network again(flows);
  apply_churn(again, script, joins);
  const bool replay = again == net &&
                      compute_rfa(again, cfg.c, master.derive(2, 0)).dump(again) ==
                          compute_rfa(net, cfg.c, master.derive(2, 0)).dump(net);

  std::vector<CheckResult> out;
  auto add = [&](const char* name, std::size_t bad, std::size_t total, nlohmann::json params) {
    CheckResult r{name, net.size(), flows};
    r.params = std::move(params);
    r.params["events"] = events;
    r.empirical = static_cast<double>(bad);
    r.bound = 0.0;
    r.pass = bad == 0 && total > 0;
    out.push_back(r);
  };
  add("churn-structure", structural_bad, structural, {{"mutations_checked", structural}});
  add("assignment-fixpoint", fixpoint_bad, snapshots, {{"snapshots", snapshots}});
  add("flow-partition", partition_bad, snapshots, {{"snapshots", snapshots}});
  add("chunk-conservation", conservation_bad, snapshots, {{"snapshots", snapshots}});
  add("delay-equals-distance", delay_bad, snapshots, {{"snapshots", snapshots}});
  add("replay-determinism", replay ? 0 : 1, 1, nlohmann::json::object());
  return out;
}

}  // namespace regraph
