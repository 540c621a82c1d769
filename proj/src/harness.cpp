#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "regraph/analysis.hpp"
#include "regraph/dissemination.hpp"
#include "regraph/error.hpp"
#include "regraph/repair.hpp"

namespace regraph {

std::vector<ChurnStep> parse_churn_script(const std::string& text) {
  std::vector<ChurnStep> steps;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::string op;
    if (!(words >> op)) continue;
    auto bad = [&](const std::string& why) {
      fail(Errc::invalid_parameter, "churn script line " + std::to_string(lineno) + ": " + why);
    };
    ChurnStep step;
    if (op == "join") {
      step.kind = ChurnKind::join;
    } else if (op == "leave") {
      long long id = 0;
      if (!(words >> id) || id < 1 || id > 0xffffffffLL) bad("leave needs a positive peer id");
      step.kind = ChurnKind::leave;
      step.peer = peer(static_cast<std::uint32_t>(id));
    } else {
      bad("unknown directive '" + op + "'");
    }
    std::string extra;
    if (words >> extra) bad("trailing text '" + extra + "'");
    steps.push_back(step);
  }
  return steps;
}

void apply_churn(Network& net, std::span<const ChurnStep> steps, const RandomSource& rng) {
  for (const auto& s : steps) {
    if (s.kind == ChurnKind::join) net.join(rng);
    else net.leave(s.peer);
  }
}

Network grow_with_churn(int flows, std::uint32_t n, double leave_rate, const RandomSource& rng) {
  if (n < 1) fail(Errc::invalid_parameter, "network needs at least the source");
  if (leave_rate < 0.0 || leave_rate >= 1.0) fail(Errc::invalid_parameter, "leave rate must be in [0, 1)");
  const RandomSource joins = rng.derive(1);
  if (leave_rate == 0.0) return grow_network(flows, n, joins);
  RandomSource coin = rng.derive(4);
  Network net(flows);
  while (net.size() < n) {
    if (net.size() > 1 && coin.uniform() < leave_rate) {
      const auto members = net.members();
      net.leave(members[1 + coin.below(members.size() - 1)]);
    } else {
      net.join(joins);
    }
  }
  return net;
}

namespace {

struct ReplicaResult {
  std::vector<SweepRow> rows;  // one per K, in cfg.extra order
};

ReplicaResult run_replica(const SweepConfig& cfg, std::uint32_t n, int replica) {
  const RandomSource base = RandomSource(cfg.seed).derive(n, static_cast<std::uint64_t>(replica));
  Network net = grow_with_churn(cfg.flows, n, cfg.leave_rate, base);
  const RfaState state = compute_rfa(net, cfg.c, base.derive(2));
  const int max_k = cfg.extra.empty() ? 0 : *std::max_element(cfg.extra.begin(), cfg.extra.end());
  net.extend_layers(max_k, base.derive(3));

  const auto decs = decompose_all(net, state);
  const DelayTable table = distance_delay_table(net, decs);
  const int slots = std::max(cfg.slots, 2 * (table.max_delay + 1));
  const DeliveryLog log = simulate(net, state, slots);
  const DelayReport delay = verify_delay_equals_distance(log, table);
  if (!delay.mismatches.empty() || log.duplicates || log.mislabeled) {
    fail(Errc::invariant_violation, "delay differs from hop distance at N=" + std::to_string(n) +
                                        " replica " + std::to_string(replica));
  }

  ReplicaResult out;
  for (int k : cfg.extra) {
    const RepairPlan plan = resolve_repairs(net, state, decs, k);
    SweepRow row;
    row.n = n;
    row.flows = cfg.flows;
    row.extra = k;
    row.replica = replica;
    row.disconnected_before = plan.disconnected_before;
    row.disconnected_after = plan.disconnected_after;
    row.extra_uploaders = plan.extra_uploaders.size();
    row.max_delay = plan.max_delay_after;
    row.delay_mismatches = delay.mismatches.size();
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepConfig& cfg) {
  if (cfg.flows < 1) fail(Errc::invalid_parameter, "need at least one flow");
  if (cfg.replicas < 1) fail(Errc::invalid_parameter, "need at least one replica");
  if (cfg.c <= 0.0 || cfg.c >= 1.0) fail(Errc::invalid_parameter, "c must lie in (0, 1)");
  for (int k : cfg.extra) {
    if (k < 0) fail(Errc::invalid_parameter, "extra layer count must be >= 0");
  }
  for (auto n : cfg.sizes) {
    if (n < 1) fail(Errc::invalid_parameter, "network size must be >= 1");
  }

  const std::size_t R = static_cast<std::size_t>(cfg.replicas);
  const std::size_t tasks = cfg.sizes.size() * R;
  std::vector<ReplicaResult> results(tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_lock;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < tasks;) {
      try {
        results[i] = run_replica(cfg, cfg.sizes[i / R], static_cast<int>(i % R));
      } catch (...) {
        std::lock_guard<std::mutex> g(error_lock);
        if (!error) error = std::current_exception();
        next.store(tasks);
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(tasks)));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);

  // (N, K, replica) order regardless of scheduling.
  std::vector<SweepRow> rows;
  rows.reserve(tasks * cfg.extra.size());
  for (std::size_t s = 0; s < cfg.sizes.size(); ++s) {
    for (std::size_t k = 0; k < cfg.extra.size(); ++k) {
      for (std::size_t r = 0; r < R; ++r) rows.push_back(results[s * R + r].rows[k]);
    }
  }
  return rows;
}

std::string sweep_csv(std::span<const SweepRow> rows) {
  std::ostringstream os;
  os << "N,M,K,replica,disconnected_before,disconnected_after,extra_uploaders,max_delay\n";
  for (const auto& r : rows) {
    os << r.n << ',' << r.flows << ',' << r.extra << ',' << r.replica << ',' << r.disconnected_before << ','
       << r.disconnected_after << ',' << r.extra_uploaders << ',' << r.max_delay << '\n';
  }
  return os.str();
}

std::vector<SweepMean> sweep_means(std::span<const SweepRow> rows) {
  struct Acc {
    double disconnected = 0, uploaders = 0, delay = 0;
    std::size_t count = 0;
  };
  std::vector<std::pair<std::uint32_t, int>> order;
  std::map<std::pair<std::uint32_t, int>, Acc> acc;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.n, r.extra);
    auto [it, fresh] = acc.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.disconnected += static_cast<double>(r.disconnected_after);
    it->second.uploaders += static_cast<double>(r.extra_uploaders);
    it->second.delay += r.max_delay;
    ++it->second.count;
  }
  std::vector<SweepMean> out;
  for (const auto& key : order) {
    const Acc& a = acc[key];
    const double n = static_cast<double>(a.count);
    out.push_back({key.first, key.second, a.disconnected / n, a.uploaders / n, a.delay / n});
  }
  return out;
}

namespace {

std::string means_csv(std::span<const SweepMean> means, const char* column, double SweepMean::*field) {
  std::ostringstream os;
  os << "N,K," << column << '\n' << std::setprecision(10);
  for (const auto& m : means) os << m.n << ',' << m.extra << ',' << m.*field << '\n';
  return os.str();
}

}  // namespace

std::string disconnected_csv(std::span<const SweepMean> means) {
  return means_csv(means, "mean_disconnected", &SweepMean::disconnected_after);
}

std::string max_delay_csv(std::span<const SweepMean> means) {
  return means_csv(means, "mean_max_delay", &SweepMean::max_delay);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) fail(Errc::invalid_parameter, "fit needs two or more paired points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) fail(Errc::invalid_parameter, "fit needs distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : sxy * sxy / (sxx * syy);
  return fit;
}

}  // namespace regraph
