// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when
// any criterion fails. `acceptance 3 5` runs only the listed criteria.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "regraph/analysis.hpp"

using namespace regraph;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const CheckResult* find(const std::vector<CheckResult>& rs, const std::string& name) {
  for (const auto& r : rs) {
    if (r.check == name) return &r;
  }
  return nullptr;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Expansion replicas are shared by criteria 3-5.
const std::vector<ExpansionStats>& expansion_replicas(double& elapsed) {
  static double took = 0.0;
  static const std::vector<ExpansionStats> stats = [] {
    const auto t0 = Clock::now();
    auto s = collect_expansion(100000, 200, kSeed, 0.5);
    took = seconds_since(t0);
    return s;
  }();
  elapsed = took;
  return stats;
}

SuiteConfig expansion_config() {
  SuiteConfig cfg;
  cfg.n = 100000;
  cfg.flows = 2;
  cfg.replicas = 200;
  cfg.seed = kSeed;
  cfg.eps = 0.1;
  cfg.margin = 0.05;
  cfg.alpha = 1e-3;
  return cfg;
}

Outcome criterion1() {
  const auto t0 = Clock::now();
  SuiteConfig cfg;
  cfg.n = 0;  // N = 1..4, M = 1..2
  cfg.replicas = 60000;
  cfg.seed = kSeed;
  const auto rs = verify_uniformity(cfg);
  const double took = seconds_since(t0);
  bool ok = took < 60.0;
  double worst_z = 0.0;
  std::size_t failed = 0;
  for (const auto& r : rs) {
    if (r.check == "exact-frequency-3sigma") worst_z = std::max(worst_z, r.empirical);
    if (!r.pass) ++failed;
  }
  ok = ok && failed == 0;
  return {ok, fmt("exact masses equal, worst |z| = %.2f (<= 3), %zu failing checks, %.1fs (< 60s)", worst_z,
                  failed, took)};
}

Outcome criterion2() {
  const auto t0 = Clock::now();
  SuiteConfig cfg;
  cfg.replicas = 50;
  cfg.seed = kSeed;
  const auto rs = verify_delay(cfg);
  const double took = seconds_since(t0);
  const auto* part = find(rs, "decomposition-partition");
  const auto* delay = find(rs, "delay-equals-distance");
  const bool ok = part && delay && part->pass && delay->pass && took < 120.0;
  return {ok, fmt("partition %.3f of %d flow graphs, %.0f delay mismatches over %d pairs, %.1fs (< 120s)",
                  part ? part->empirical : 0.0, part ? part->params["flow_graphs"].get<int>() : 0,
                  delay ? delay->empirical : -1.0, delay ? delay->params["pairs_checked"].get<int>() : 0, took)};
}

Outcome criterion3() {
  double took = 0.0;
  const auto& stats = expansion_replicas(took);
  const auto rs = expansion_checks(stats, expansion_config(), 0.9);
  const auto* r = find(rs, "binary-prefix");
  const bool ok = r && r->pass && took < 600.0;
  return {ok, fmt("binary up to d1=%d in %.3f of replicas, need >= %.4f, %.1fs (< 600s)",
                  r->params["d1"].get<int>(), r->empirical, r->bound, took)};
}

Outcome criterion4() {
  double took = 0.0;
  const auto& stats = expansion_replicas(took);
  const auto rs = expansion_checks(stats, expansion_config(), 0.9);
  const auto* ev = find(rs, "expansion-event");
  const auto* h1 = find(rs, "hypergeom-layer1");
  const auto* h2 = find(rs, "hypergeom-layer2");
  const bool ok = ev && h1 && h2 && ev->pass && h1->pass && h2->pass;
  return {ok, fmt("event frequency %.3f (growth %.3f, mass %.3f), need >= 0.9; hypergeometric min p %.2g / %.2g "
                  "vs %.2g",
                  ev->empirical, ev->params.value("growth_frequency", 0.0), ev->params.value("mass_frequency", 0.0),
                  h1->empirical, h2->empirical, h1->bound)};
}

Outcome criterion5() {
  double took = 0.0;
  const auto& stats = expansion_replicas(took);
  const auto rs = half_split_checks(stats, expansion_config(), 0.05, 0.95);
  const auto& r = rs.front();
  return {r.pass, fmt("max_d |X_d/N_d - 1/2| < 0.05 in %.3f of replicas (need >= 0.95), worst %.4f", r.empirical,
                      r.params["worst_deviation"].get<double>())};
}

Outcome criterion6() {
  SuiteConfig cfg;
  cfg.n = 10000;
  cfg.replicas = 500;
  cfg.seed = kSeed;
  ContractionOptions opt;  // h <= 10, eps 0.1, margin 0.05, h* <= 1.2 ln N in 95%
  const auto stats = collect_contraction(cfg.n, cfg.replicas, cfg.seed, cfg.c);
  const ContractionReport rep = check_contraction(stats, cfg.c, opt);
  double worst_t = 0.0, worst_gap = 1.0;
  for (const auto& row : rep.rows) {
    if (row.std_error > 0) worst_t = std::max(worst_t, std::abs(row.mean_increment) / row.std_error);
    if (row.samples) worst_gap = std::min(worst_gap, row.step_frequency - (row.step_bound - opt.margin));
  }
  return {rep.pass(), fmt("martingale %s (worst |mean|/se %.2f), step %s (min slack %.3f), h* <= %.2f in %.3f",
                          rep.martingale_ok ? "ok" : "FAIL", worst_t, rep.step_ok ? "ok" : "FAIL", worst_gap,
                          rep.hstar_limit, rep.hstar_frequency)};
}

Outcome criterion7() {
  const auto t0 = Clock::now();
  SweepConfig cfg;  // N grid, M = 4, K = 0..2, 100 replicas
  cfg.seed = kSeed;
  cfg.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const auto rows = run_sweep(cfg);
  const auto means = sweep_means(rows);
  const double took = seconds_since(t0);

  double worst_disc = 0.0, worst_up = 0.0, worst_rise = -1e9, worst_r2 = 1.0;
  for (const auto& m : means) {
    if (m.extra == 2) worst_disc = std::max(worst_disc, m.disconnected_after);
    if (m.extra > 0) worst_up = std::max(worst_up, m.extra_uploaders);
  }
  for (int k : cfg.extra) {
    std::vector<double> x, y;
    for (const auto& m : means) {
      if (m.extra != k) continue;
      x.push_back(std::log(static_cast<double>(m.n)));
      y.push_back(m.max_delay);
    }
    worst_r2 = std::min(worst_r2, fit_line(x, y).r_squared);
  }
  for (const auto& a : means) {
    if (a.extra == 0) continue;
    for (const auto& b : means) {
      if (b.extra == 0 && b.n == a.n) worst_rise = std::max(worst_rise, a.max_delay - b.max_delay);
    }
  }
  const bool ok = rows.size() == 1800 && worst_disc <= 5.0 && worst_up <= 35.0 && worst_r2 >= 0.9 &&
                  worst_rise <= 1.0 && took < 1800.0;
  return {ok, fmt("%zu rows; max mean disconnected at K=2 %.2f (<= 5); max mean uploaders %.2f (<= 35); "
                  "min R^2 %.3f (>= 0.9); max repair delay rise %.2f (<= 1); %.1fs (< 1800s)",
                  rows.size(), worst_disc, worst_up, worst_r2, worst_rise, took)};
}

Outcome criterion8() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string failing;
  std::size_t mutations = 0;
  for (int flows : {2, 4}) {
    SuiteConfig cfg;
    cfg.n = 10000;
    cfg.flows = flows;
    cfg.seed = kSeed + static_cast<std::uint64_t>(flows);
    for (const auto& r : verify_properties(cfg)) {
      if (r.check == "churn-structure") mutations += r.params["mutations_checked"].get<std::size_t>();
      if (!r.pass) {
        ok = false;
        failing += " " + r.check + "/M=" + std::to_string(flows);
      }
    }
  }
  const double took = seconds_since(t0);
  ok = ok && took < 300.0;
  return {ok, fmt("%zu churn mutations checked, failing:%s, %.1fs (< 300s)", mutations,
                  failing.empty() ? " none" : failing.c_str(), took)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"uniform independent layers", criterion1},
      {"tree-plus-cycles and delay = distance", criterion2},
      {"binary prefix", criterion3},
      {"expansion", criterion4},
      {"half split", criterion5},
      {"contraction", criterion6},
      {"repair sweep envelope", criterion7},
      {"property suite under churn", criterion8},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s: %s -- %s\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
