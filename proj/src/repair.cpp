#include "regraph/repair.hpp"

#include <algorithm>
#include <queue>
#include <sstream>
#include <tuple>

#include "regraph/error.hpp"

namespace regraph {

void extend_layers(Network& net, int k, const RandomSource& rng) { net.extend_layers(k, rng); }

std::size_t RepairPlan::requests() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const RepairEntry& e) { return e.layer >= 0; }));
}

std::string RepairPlan::csv() const {
  std::ostringstream os;
  os << "peer,flow,helper,served_via_cycle\n";
  for (const auto& e : entries) {
    os << e.peer << ',' << e.flow << ',' << e.helper << ',' << (e.via_cycle ? "true" : "false") << '\n';
  }
  return os.str();
}

RepairPlan resolve_repairs(const Network& net, const RfaState& state, const std::vector<Decomposition>& decs,
                           int k) {
  const int flows = net.flows();
  if (k < 0 || k > net.extra_layers()) {
    fail(Errc::invalid_parameter, "requested " + std::to_string(k) + " extra layers, network has " +
                                      std::to_string(net.extra_layers()));
  }
  if (static_cast<int>(decs.size()) != flows) fail(Errc::invalid_parameter, "need one decomposition per flow");

  const auto peers = net.sorted_peers();
  const auto bound = net.id_bound();
  const auto K = static_cast<std::size_t>(k);

  std::vector<std::vector<int>> delay(static_cast<std::size_t>(flows));
  std::vector<std::vector<std::vector<PeerId>>> kids(static_cast<std::size_t>(flows),
                                                     std::vector<std::vector<PeerId>>(bound));
  for (int f = 1; f <= flows; ++f) delay[static_cast<std::size_t>(f - 1)] = decs[static_cast<std::size_t>(f - 1)].distance;
  for (PeerId v : peers) {
    if (v == kSource) continue;
    for (int m = 0; m < flows; ++m) {
      kids[static_cast<std::size_t>(state.label(v, m) - 1)][index_of(net.parent(m, v))].push_back(v);
    }
  }

  RepairPlan plan;
  plan.extra = k;
  auto tally = [&](std::size_t& disconnected, int& max_delay) {
    disconnected = 0;
    max_delay = 0;
    for (PeerId v : peers) {
      bool missing = false;
      for (const auto& d : delay) {
        if (d[index_of(v)] < 0) missing = true;
        else max_delay = std::max(max_delay, d[index_of(v)]);
      }
      disconnected += missing ? 1 : 0;
    }
  };
  tally(plan.disconnected_before, plan.max_delay_before);

  // Earliest-arrival relaxation over all flows at once: a disconnected
  // (peer, flow) takes whichever of its flow parent or extra-layer parents
  // delivers first. An extra-layer edge carries one flow only, since each extra
  // layer costs its parent exactly one flow's worth of upload. Ties prefer the
  // flow edge (no extra upload), then the lower extra layer.
  std::vector<std::vector<std::vector<PeerId>>> xkids(K, std::vector<std::vector<PeerId>>(bound));
  for (PeerId v : peers) {
    for (std::size_t j = 0; j < K; ++j) {
      const PeerId p = net.parent(flows + static_cast<int>(j), v);
      if (p != v) xkids[j][index_of(p)].push_back(v);
    }
  }
  struct Offer {
    int delay;
    int layer;  // -1 = flow edge
    int flow;
    PeerId v, from;
    bool operator>(const Offer& o) const {
      return std::tie(delay, layer, flow, v, from) > std::tie(o.delay, o.layer, o.flow, o.v, o.from);
    }
  };
  std::vector<bool> edge_used(static_cast<std::size_t>(bound) * K, false);
  std::vector<std::vector<PeerId>> root_helper(static_cast<std::size_t>(flows), std::vector<PeerId>(bound, kSource));
  std::priority_queue<Offer, std::vector<Offer>, std::greater<>> heap;
  auto offer_from = [&](int f, PeerId u) {
    const auto& d = delay[static_cast<std::size_t>(f - 1)];
    const int du = d[index_of(u)];
    for (PeerId c : kids[static_cast<std::size_t>(f - 1)][index_of(u)]) {
      if (d[index_of(c)] < 0) heap.push({du + 1, -1, f, c, u});
    }
    for (std::size_t j = 0; j < K; ++j) {
      for (PeerId c : xkids[j][index_of(u)]) {
        if (d[index_of(c)] < 0 && !edge_used[index_of(c) * K + j]) {
          heap.push({du + 1, flows + static_cast<int>(j), f, c, u});
        }
      }
    }
  };
  for (int f = 1; f <= flows; ++f) {
    for (PeerId u : peers) {
      if (delay[static_cast<std::size_t>(f - 1)][index_of(u)] >= 0) offer_from(f, u);
    }
  }
  while (!heap.empty()) {
    const Offer o = heap.top();
    heap.pop();
    auto& d = delay[static_cast<std::size_t>(o.flow - 1)];
    auto& roots = root_helper[static_cast<std::size_t>(o.flow - 1)];
    if (d[index_of(o.v)] >= 0) continue;
    if (o.layer >= 0) {
      const auto slot = index_of(o.v) * K + static_cast<std::size_t>(o.layer - flows);
      if (edge_used[slot]) continue;
      edge_used[slot] = true;
      roots[index_of(o.v)] = o.from;
      plan.extra_uploaders.push_back(o.from);
    } else {
      roots[index_of(o.v)] = roots[index_of(o.from)];
    }
    d[index_of(o.v)] = o.delay;
    plan.entries.push_back({o.v, o.flow, roots[index_of(o.v)], o.layer, o.layer < 0, o.delay});
    offer_from(o.flow, o.v);
  }

  std::sort(plan.extra_uploaders.begin(), plan.extra_uploaders.end());
  plan.extra_uploaders.erase(std::unique(plan.extra_uploaders.begin(), plan.extra_uploaders.end()),
                             plan.extra_uploaders.end());
  tally(plan.disconnected_after, plan.max_delay_after);
  return plan;
}

}  // namespace regraph
