#include "regraph/flowgraph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "regraph/error.hpp"

namespace regraph {

std::vector<std::vector<PeerId>> FlowGraph::children() const {
  std::vector<std::vector<PeerId>> out(in_edge.size());
  for (PeerId v : peers) {
    const InEdge& e = incoming(v);
    if (e.parent != kNoPeer) out[index_of(e.parent)].push_back(v);
  }
  return out;
}

FlowGraph build_flow_graph(const Network& net, const RfaState& state, int flow) {
  if (flow < 1 || flow > net.flows()) {
    fail(Errc::invalid_parameter, "flow " + std::to_string(flow) + " out of range");
  }
  FlowGraph fg;
  fg.flow = flow;
  fg.peers = net.sorted_peers();
  fg.in_edge.assign(net.id_bound(), InEdge{});
  for (PeerId v : fg.peers) {
    if (v == kSource) continue;
    for (int m = 0; m < net.flows(); ++m) {
      if (state.label(v, m) == flow) {
        fg.in_edge[index_of(v)] = InEdge{net.parent(m, v), m};
        break;
      }
    }
    if (fg.incoming(v).parent == kNoPeer) {
      fail(Errc::invariant_violation, "peer " + std::to_string(index_of(v)) + " has no incoming edge for a flow");
    }
  }
  return fg;
}

std::size_t Decomposition::disconnected() const {
  std::size_t n = 0;
  for (const auto& c : cycles) n += c.cycle.size() + c.hanging.size();
  return n;
}

std::string Decomposition::dump() const {
  std::ostringstream os;
  for (PeerId v : tree) os << v << ' ' << distance_of(v) << '\n';
  for (const auto& c : cycles) {
    os << "cycle:";
    for (PeerId v : c.cycle) os << ' ' << v;
    os << '\n';
    if (!c.hanging.empty()) {
      os << "hanging:";
      for (PeerId v : c.hanging) os << ' ' << v;
      os << '\n';
    }
  }
  return os.str();
}

Decomposition decompose(const FlowGraph& fg) {
  enum : std::uint8_t { kNew, kOnPath, kDone };
  const std::size_t bound = fg.in_edge.size();
  Decomposition d;
  d.flow = fg.flow;
  d.distance.assign(bound, kUnreachable);

  std::vector<std::uint8_t> mark(bound, kNew);
  std::vector<int> component(bound, -1);
  std::vector<std::size_t> path_pos(bound, 0);
  mark[index_of(kSource)] = kDone;
  d.distance[index_of(kSource)] = 0;

  std::vector<PeerId> path;
  for (PeerId start : fg.peers) {
    if (mark[index_of(start)] != kNew) continue;
    path.clear();
    PeerId cur = start;
    while (mark[index_of(cur)] == kNew) {
      mark[index_of(cur)] = kOnPath;
      path_pos[index_of(cur)] = path.size();
      path.push_back(cur);
      cur = fg.incoming(cur).parent;
    }

    const auto ci = index_of(cur);
    std::size_t tail_end = path.size();  // path[0, tail_end) hangs below `cur`
    int comp = -1;
    if (mark[ci] == kOnPath) {
      // Closed a new cycle: path[pos..] walks it against the flow direction.
      tail_end = path_pos[ci];
      CycleComponent c;
      c.cycle.assign(path.rbegin(), path.rend() - static_cast<std::ptrdiff_t>(tail_end));
      std::rotate(c.cycle.begin(), std::min_element(c.cycle.begin(), c.cycle.end()), c.cycle.end());
      comp = static_cast<int>(d.cycles.size());
      for (PeerId v : c.cycle) component[index_of(v)] = comp;
      d.cycles.push_back(std::move(c));
    } else {
      comp = component[ci];
    }

    if (comp < 0) {
      int dist = d.distance[ci];
      for (std::size_t i = tail_end; i-- > 0;) d.distance[index_of(path[i])] = ++dist;
    } else {
      for (std::size_t i = 0; i < tail_end; ++i) {
        component[index_of(path[i])] = comp;
        d.cycles[static_cast<std::size_t>(comp)].hanging.push_back(path[i]);
      }
    }
    for (PeerId v : path) mark[index_of(v)] = kDone;
  }

  for (PeerId v : fg.peers) {
    if (d.distance_of(v) != kUnreachable) d.tree.push_back(v);
  }
  for (auto& c : d.cycles) std::sort(c.hanging.begin(), c.hanging.end());
  std::sort(d.cycles.begin(), d.cycles.end(),
            [](const CycleComponent& a, const CycleComponent& b) { return a.cycle.front() < b.cycle.front(); });
  return d;
}

std::string ContractionStats::csv() const {
  std::ostringstream os;
  os << "h,S_h,S_gt_h,gamma_h\n";
  os.precision(17);
  for (std::size_t h = 0; h < shell.size(); ++h) {
    os << h << ',' << shell[h] << ',' << remaining[h] << ',';
    if (h > 0) os << gamma[h];
    os << '\n';
  }
  return os.str();
}

ContractionStats contraction_stats(const Network& net, const RfaState& state, const FlowGraph& flow1) {
  if (state.flows != 2) fail(Errc::analysis_limited_to_two_flows, "contraction shells need M = 2");
  if (flow1.flow != 1) fail(Errc::invalid_parameter, "contraction shells are measured on flow graph 1");

  ContractionStats st;
  st.n = net.size();
  const double ln = std::log(static_cast<double>(st.n));
  st.threshold = static_cast<double>(st.n) / std::exp(std::pow(ln, 1.0 - state.c));

  constexpr int kNever = -1;
  std::vector<int> shell_of(net.id_bound(), kNever);
  std::vector<PeerId> current;
  std::vector<PeerId> next;

  std::uint64_t s0 = 0;
  for (PeerId v : net.members()) {
    const int d = state.depth_of(v);
    if (d >= 0 && d < state.dstar) {
      shell_of[index_of(v)] = 0;
      ++s0;
    } else if (d == state.dstar && state.flow_of(v) == 1) {
      shell_of[index_of(v)] = 1;
      current.push_back(v);
    }
  }
  std::sort(current.begin(), current.end());
  st.shell = {s0, current.size()};

  const auto kids = flow1.children();
  // Grow shells until one comes out empty.
  while (!current.empty()) {
    next.clear();
    const int h = static_cast<int>(st.shell.size());
    for (PeerId u : current) {
      for (PeerId v : kids[index_of(u)]) {
        if (shell_of[index_of(v)] == kNever) {
          shell_of[index_of(v)] = h;
          next.push_back(v);
        }
      }
    }
    st.shell.push_back(next.size());
    current.swap(next);
  }
  // The trailing shell is the first empty one (unless S_1 itself was empty).

  const std::size_t shells = st.shell.size();
  std::uint64_t left = st.n;
  st.remaining.resize(shells);
  for (std::size_t h = 0; h < shells; ++h) {
    left -= st.shell[h];
    st.remaining[h] = left;
  }

  // S_{>h,m}: peers outside S_{<=h} whose flow-1 edge is in layer m.
  std::vector<std::array<std::uint64_t, 2>> by_shell(shells + 1, {0, 0});
  for (PeerId v : net.members()) {
    if (v == kSource) continue;
    const int s = shell_of[index_of(v)];
    const std::size_t slot = s == kNever ? shells : static_cast<std::size_t>(s);
    ++by_shell[slot][static_cast<std::size_t>(flow1.incoming(v).layer)];
  }
  st.remaining_by_layer.assign(shells, {0, 0});
  std::array<std::uint64_t, 2> acc{by_shell[shells]};
  for (std::size_t h = shells; h-- > 0;) {
    st.remaining_by_layer[h] = acc;
    acc[0] += by_shell[h][0];
    acc[1] += by_shell[h][1];
  }

  st.gamma.assign(shells, 0.0);
  for (std::size_t h = 1; h < shells; ++h) {
    st.gamma[h] = st.remaining[h - 1] == 0
                      ? 0.0
                      : static_cast<double>(st.remaining[h]) / static_cast<double>(st.remaining[h - 1]);
  }
  for (std::size_t h = 0; h < shells; ++h) {
    if (static_cast<double>(st.remaining[h]) < st.threshold) {
      st.h_star = static_cast<int>(h);
      break;
    }
  }
  return st;
}

std::size_t DelayTable::disconnected_peers() const {
  std::size_t n = 0;
  for (PeerId v : peers) n += connected[index_of(v)] ? 0 : 1;
  return n;
}

DelayTable distance_delay_table(const Network& net, const std::vector<Decomposition>& decs) {
  DelayTable t;
  t.flows = static_cast<int>(decs.size());
  t.peers = net.sorted_peers();
  const auto bound = net.id_bound();
  t.distance.assign(static_cast<std::size_t>(bound) * decs.size(), kUnreachable);
  t.worst.assign(bound, kUnreachable);
  t.connected.assign(bound, false);
  for (PeerId v : t.peers) {
    bool all = true;
    int worst = kUnreachable;
    for (std::size_t f = 0; f < decs.size(); ++f) {
      const int d = decs[f].distance_of(v);
      t.distance[static_cast<std::size_t>(index_of(v)) * decs.size() + f] = d;
      if (d == kUnreachable) all = false;
      else worst = std::max(worst, d);
    }
    t.worst[index_of(v)] = worst;
    t.connected[index_of(v)] = all;
    t.max_delay = std::max(t.max_delay, worst);
  }
  return t;
}

std::vector<Decomposition> decompose_all(const Network& net, const RfaState& state) {
  std::vector<Decomposition> out;
  for (int f = 1; f <= net.flows(); ++f) out.push_back(decompose(build_flow_graph(net, state, f)));
  return out;
}

}  // namespace regraph
