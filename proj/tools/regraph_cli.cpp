// regraph_cli: simulate | verify <suite> | sweep
//
// Exit codes: 0 ok, 1 a verification check failed, 2 invalid configuration,
// 3 internal invariant violation.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "regraph/analysis.hpp"
#include "regraph/dissemination.hpp"
#include "regraph/error.hpp"
#include "regraph/repair.hpp"

namespace fs = std::filesystem;
using namespace regraph;

namespace {

constexpr int kExitCheckFailed = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitInternal = 3;

struct RunConfig {
  std::vector<std::uint32_t> n;
  int m = 0;
  std::vector<int> k;
  double c = 0.5;
  int slots = 0;
  int replicas = 0;
  std::optional<std::uint64_t> seed;
  std::string churn_file;
  std::string out_dir;
  std::optional<double> margin;
  std::optional<double> alpha;
  int jobs = 1;
  double leave_rate = 0.0;
};

void invalid(const std::string& why) { fail(Errc::invalid_parameter, why); }

// Temp file in the same directory, then rename over the target.
void write_atomic(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) invalid("cannot write " + tmp.string());
    out << bytes;
    out.close();
    if (!out) invalid("short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

fs::path out_dir(const RunConfig& cfg) {
  std::string dir = cfg.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv("REGRAPH_OUT_DIR")) dir = env;
  }
  if (dir.empty()) dir = ".";
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) invalid("cannot read churn file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void check_common(const RunConfig& cfg) {
  if (cfg.c <= 0.0 || cfg.c >= 1.0) invalid("--c must lie in (0, 1)");
  if (cfg.slots < 0) invalid("--slots must be >= 0");
  if (cfg.margin && *cfg.margin < 0.0) invalid("--margin must be >= 0");
  if (cfg.alpha && (*cfg.alpha <= 0.0 || *cfg.alpha >= 1.0)) invalid("--alpha must lie in (0, 1)");
  for (auto n : cfg.n) {
    if (n < 1) invalid("--n must be >= 1");
  }
  for (int k : cfg.k) {
    if (k < 0) invalid("--k must be >= 0");
  }
}

int cmd_simulate(const RunConfig& cfg) {
  check_common(cfg);
  if (!cfg.seed) invalid("--seed is required");
  const int flows = cfg.m == 0 ? 2 : cfg.m;
  if (flows < 1) invalid("--m must be >= 1");
  if (cfg.n.size() > 1 || cfg.k.size() > 1) invalid("simulate takes a single --n and --k");
  const std::uint32_t n = cfg.n.empty() ? 100 : cfg.n.front();
  const int k = cfg.k.empty() ? 0 : cfg.k.front();

  const RandomSource master(*cfg.seed);
  Network net(flows);
  if (!cfg.churn_file.empty()) {
    apply_churn(net, parse_churn_script(read_file(cfg.churn_file)), master.derive(1));
  } else {
    net = grow_network(flows, n, master.derive(1));
  }
  net.check_invariants();
  const RfaState state = compute_rfa(net, cfg.c, master.derive(2));
  net.extend_layers(k, master.derive(3));

  const auto decs = decompose_all(net, state);
  const DelayTable table = distance_delay_table(net, decs);
  const int slots = cfg.slots > 0 ? cfg.slots : 2 * (table.max_delay + 1);
  const DeliveryLog log = simulate(net, state, slots);
  const DelayReport delay = verify_delay_equals_distance(log, table);
  if (!delay.mismatches.empty() || log.duplicates || log.mislabeled) {
    fail(Errc::invariant_violation, "simulated delay differs from hop distance");
  }
  const RepairPlan plan = resolve_repairs(net, state, decs, k);

  const fs::path dir = out_dir(cfg);
  std::string decomposition;
  for (const auto& d : decs) decomposition += "flow " + std::to_string(d.flow) + "\n" + d.dump();
  write_atomic(dir / "graph.txt", net.dump());
  write_atomic(dir / "rfa.txt", state.dump(net));
  write_atomic(dir / "decomposition.txt", decomposition);
  write_atomic(dir / "delivery.csv", log.csv());
  write_atomic(dir / "summary.csv", summary_csv(log, table));
  write_atomic(dir / "repair.csv", plan.csv());

  std::cout << "peers " << net.size() << ", flows " << flows << ", extra layers " << k << ", d* " << state.dstar
            << ", slots " << slots << "\n"
            << "disconnected before/after repair " << plan.disconnected_before << "/" << plan.disconnected_after
            << ", extra uploaders " << plan.extra_uploaders.size() << ", max delay " << plan.max_delay_after << "\n";
  return 0;
}

int cmd_verify(const std::string& suite, const RunConfig& cfg) {
  check_common(cfg);
  if (cfg.n.size() > 1) invalid("verify takes a single --n");
  SuiteConfig sc;
  sc.seed = cfg.seed.value_or(1);
  sc.c = cfg.c;
  if (cfg.margin) sc.margin = *cfg.margin;
  if (cfg.alpha) sc.alpha = *cfg.alpha;
  auto pick = [&](std::uint64_t n, int replicas) {
    sc.n = cfg.n.empty() ? n : cfg.n.front();
    sc.replicas = cfg.replicas > 0 ? cfg.replicas : replicas;
  };
  if (cfg.m != 0) sc.flows = cfg.m;

  std::vector<CheckResult> results;
  if (suite == "uniformity") {
    pick(0, 60000);
    results = verify_uniformity(sc);
  } else if (suite == "expansion") {
    pick(100000, 200);
    results = verify_expansion(sc);
  } else if (suite == "halfsplit") {
    pick(100000, 200);
    results = verify_half_split(sc, 0.05, 0.95);
  } else if (suite == "contraction") {
    pick(10000, 500);
    ContractionOptions opt;
    opt.margin = sc.margin;
    results = verify_contraction(sc, opt);
  } else if (suite == "delay") {
    pick(0, 50);
    results = verify_delay(sc);
  } else if (suite == "properties") {
    pick(10000, 1);
    results = verify_properties(sc);
  } else {
    invalid("unknown suite '" + suite + "' (uniformity|expansion|halfsplit|contraction|delay|properties)");
  }

  bool ok = true;
  for (const auto& r : results) {
    ok = ok && r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.check << " N=" << r.n << " empirical=" << r.empirical
              << " bound=" << r.bound << "\n";
  }
  const nlohmann::json report = results;
  write_atomic(out_dir(cfg) / ("report-" + suite + ".json"), report.dump(2) + "\n");
  return ok ? 0 : kExitCheckFailed;
}

int cmd_sweep(const RunConfig& cfg) {
  check_common(cfg);
  if (!cfg.seed) invalid("--seed is required");
  SweepConfig sc;
  if (!cfg.n.empty()) sc.sizes = cfg.n;
  if (!cfg.k.empty()) sc.extra = cfg.k;
  sc.flows = cfg.m == 0 ? 4 : cfg.m;
  if (cfg.replicas > 0) sc.replicas = cfg.replicas;
  sc.seed = *cfg.seed;
  sc.c = cfg.c;
  sc.slots = cfg.slots;
  sc.leave_rate = cfg.leave_rate;
  sc.jobs = cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

  const auto rows = run_sweep(sc);
  const auto means = sweep_means(rows);
  const fs::path dir = out_dir(cfg);
  write_atomic(dir / "sweep.csv", sweep_csv(rows));
  write_atomic(dir / "mean_disconnected.csv", disconnected_csv(means));
  write_atomic(dir / "mean_max_delay.csv", max_delay_csv(means));
  std::cout << rows.size() << " rows written to " << (dir / "sweep.csv").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-layer overlay streaming: simulation, verification and sweeps"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string suite;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--c", cfg.c, "depth threshold exponent, 0 < c < 1");
    sub->add_option("--seed", cfg.seed, "master seed");
    sub->add_option("--out-dir", cfg.out_dir, "output directory (default $REGRAPH_OUT_DIR or .)");
    sub->add_option("--margin", cfg.margin, "additive slack on probability bounds");
    sub->add_option("--alpha", cfg.alpha, "chi-square significance");
    sub->add_option("--slots", cfg.slots, "simulation horizon (0 = twice the deepest distance + 1)");
    sub->add_option("--replicas", cfg.replicas, "replicas / samples");
  };

  auto* sim = app.add_subcommand("simulate", "single end-to-end run");
  add_common(sim);
  sim->add_option("--n", cfg.n, "peers including the source")->expected(1);
  sim->add_option("--m", cfg.m, "stream layers (flows), default 2");
  sim->add_option("--k", cfg.k, "extra repair layers")->expected(1);
  sim->add_option("--churn-file", cfg.churn_file, "script of `join` / `leave <id>` lines");

  auto* ver = app.add_subcommand("verify", "run a verification suite");
  add_common(ver);
  ver->add_option("suite", suite, "uniformity|expansion|halfsplit|contraction|delay|properties")->required();
  ver->add_option("--n", cfg.n, "network size")->expected(1);
  ver->add_option("--m", cfg.m, "flows");

  auto* sw = app.add_subcommand("sweep", "repair grid over N and K");
  add_common(sw);
  sw->add_option("--n", cfg.n, "network sizes")->expected(1, 64);
  sw->add_option("--m", cfg.m, "flows, default 4");
  sw->add_option("--k", cfg.k, "extra layer counts")->expected(1, 16);
  sw->add_option("--jobs", cfg.jobs, "worker threads (0 = hardware)")->default_val(0);
  sw->add_option("--leave-rate", cfg.leave_rate, "probability of a departure before each join");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (sim->parsed()) return cmd_simulate(cfg);
    if (ver->parsed()) return cmd_verify(suite, cfg);
    return cmd_sweep(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::invariant_violation ? kExitInternal : kExitInvalid;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
