#include "regraph/topology.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "regraph/error.hpp"

namespace regraph {
namespace {

// Break peer v into layer edge (w, c(w)); w == v makes a loop.
void splice_in(Layer& layer, PeerId v, PeerId w) {
  const auto vi = index_of(v);
  if (w == v) {
    layer.succ[vi] = v;
    layer.pred[vi] = v;
    return;
  }
  const PeerId next = layer.child(w);
  layer.succ[vi] = next;
  layer.pred[vi] = w;
  layer.succ[index_of(w)] = v;
  layer.pred[index_of(next)] = v;
}

void splice_out(Layer& layer, PeerId v) {
  const auto vi = index_of(v);
  const PeerId p = layer.pred[vi];
  const PeerId c = layer.succ[vi];
  if (p != v) {
    layer.succ[index_of(p)] = c;
    layer.pred[index_of(c)] = p;
  }
  layer.succ[vi] = kNoPeer;
  layer.pred[vi] = kNoPeer;
}

Layer loop_layer(std::uint32_t bound) {
  Layer layer;
  layer.succ.assign(bound, kNoPeer);
  layer.pred.assign(bound, kNoPeer);
  layer.succ[index_of(kSource)] = kSource;
  layer.pred[index_of(kSource)] = kSource;
  return layer;
}

std::uint64_t factorial(int n) {
  std::uint64_t r = 1;
  for (int i = 2; i <= n; ++i) r *= static_cast<std::uint64_t>(i);
  return r;
}

}  // namespace

Network::Network(int flows) : flows_(flows) {
  if (flows < 1) fail(Errc::invalid_parameter, "network needs at least one layer");
  layers_.assign(static_cast<std::size_t>(flows), loop_layer(next_id_));
  position_.assign(next_id_, kAbsent);
  insert_member(kSource);
}

bool Network::contains(PeerId v) const {
  const auto i = index_of(v);
  return i < position_.size() && position_[i] != kAbsent;
}

std::vector<PeerId> Network::sorted_peers() const {
  std::vector<PeerId> out(members_.begin(), members_.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<PeerId> Network::parents(PeerId v) const {
  if (!contains(v)) fail(Errc::unknown_peer, "peer " + std::to_string(index_of(v)));
  std::vector<PeerId> out;
  out.reserve(layers_.size());
  for (const auto& l : layers_) out.push_back(l.parent(v));
  return out;
}

std::vector<PeerId> Network::children(PeerId v) const {
  if (!contains(v)) fail(Errc::unknown_peer, "peer " + std::to_string(index_of(v)));
  std::vector<PeerId> out;
  out.reserve(layers_.size());
  for (const auto& l : layers_) out.push_back(l.child(v));
  return out;
}

void Network::grow_to(std::uint32_t bound) {
  if (bound <= position_.size()) return;
  position_.resize(bound, kAbsent);
  for (auto& l : layers_) {
    l.succ.resize(bound, kNoPeer);
    l.pred.resize(bound, kNoPeer);
  }
}

void Network::insert_member(PeerId v) {
  position_[index_of(v)] = static_cast<std::uint32_t>(members_.size());
  members_.push_back(v);
}

void Network::remove_member(PeerId v) {
  const auto pos = position_[index_of(v)];
  const PeerId last = members_.back();
  members_[pos] = last;
  position_[index_of(last)] = pos;
  members_.pop_back();
  position_[index_of(v)] = kAbsent;
}

PeerId Network::join(const RandomSource& rng) {
  const PeerId v = next_id();
  join(v, rng);
  return v;
}

void Network::join(PeerId v, const RandomSource& rng) {
  if (index_of(v) < next_id_) {
    fail(Errc::invalid_parameter, "peer id " + std::to_string(index_of(v)) + " already issued");
  }
  const std::uint64_t event = history_.size();
  next_id_ = index_of(v) + 1;
  grow_to(next_id_);
  insert_member(v);
  for (std::size_t m = 0; m < layers_.size(); ++m) {
    const PeerId w = members_[rng.derive(event, m).below(members_.size())];
    splice_in(layers_[m], v, w);
  }
  history_.push_back({ChurnKind::join, v});
}

void Network::join_with(PeerId v, std::span<const PeerId> targets) {
  if (index_of(v) < next_id_) {
    fail(Errc::invalid_parameter, "peer id " + std::to_string(index_of(v)) + " already issued");
  }
  if (targets.size() != layers_.size()) {
    fail(Errc::invalid_parameter, "need one break-in target per layer");
  }
  for (PeerId w : targets) {
    if (w != v && !contains(w)) {
      fail(Errc::unknown_peer, "break-in target " + std::to_string(index_of(w)));
    }
  }
  next_id_ = index_of(v) + 1;
  grow_to(next_id_);
  insert_member(v);
  for (std::size_t m = 0; m < layers_.size(); ++m) splice_in(layers_[m], v, targets[m]);
  history_.push_back({ChurnKind::join, v});
}

void Network::leave(PeerId v) {
  if (v == kSource) fail(Errc::source_departure_forbidden, "the source never leaves");
  if (!contains(v)) fail(Errc::unknown_peer, "peer " + std::to_string(index_of(v)));
  for (auto& l : layers_) splice_out(l, v);
  remove_member(v);
  history_.push_back({ChurnKind::leave, v});
}

void Network::extend_layers(int k, const RandomSource& rng) {
  if (k < 0) fail(Errc::invalid_parameter, "negative extra layer count");
  const auto first = layers_.size();
  for (std::size_t m = first; m < first + static_cast<std::size_t>(k); ++m) {
    Layer layer = loop_layer(next_id_);
    std::vector<PeerId> order{kSource};
    std::vector<std::uint32_t> pos(next_id_, kAbsent);
    pos[index_of(kSource)] = 0;
    for (std::size_t event = 0; event < history_.size(); ++event) {
      const auto& e = history_[event];
      if (e.kind == ChurnKind::join) {
        pos[index_of(e.peer)] = static_cast<std::uint32_t>(order.size());
        order.push_back(e.peer);
        splice_in(layer, e.peer, order[rng.derive(event, m).below(order.size())]);
      } else {
        splice_out(layer, e.peer);
        const auto p = pos[index_of(e.peer)];
        order[p] = order.back();
        pos[index_of(order[p])] = p;
        order.pop_back();
        pos[index_of(e.peer)] = kAbsent;
      }
    }
    layers_.push_back(std::move(layer));
  }
}

void Network::check_invariants() const {
  auto broken = [](const std::string& what) { fail(Errc::invariant_violation, what); };
  if (!contains(kSource)) broken("source missing");
  if (members_.size() + 1 > next_id_) broken("more members than issued ids");
  for (std::size_t m = 0; m < layers_.size(); ++m) {
    const Layer& l = layers_[m];
    if (l.succ.size() != position_.size() || l.pred.size() != position_.size()) {
      broken("layer table size mismatch");
    }
    for (std::uint32_t i = 0; i < position_.size(); ++i) {
      const PeerId v = peer(i);
      if (!contains(v)) {
        if (l.succ[i] != kNoPeer || l.pred[i] != kNoPeer) broken("absent peer holds an edge");
        continue;
      }
      const PeerId c = l.succ[i];
      const PeerId p = l.pred[i];
      if (!contains(c) || !contains(p)) broken("edge leaves the peer set");
      if (l.parent(c) != v || l.child(p) != v) {
        broken("layer " + std::to_string(m + 1) + " is not a permutation at peer " + std::to_string(i));
      }
    }
  }
}

std::string Network::dump() const {
  std::ostringstream os;
  const auto peers = sorted_peers();
  os << peers.size() << ' ' << layers_.size() << '\n';
  for (std::size_t m = 0; m < layers_.size(); ++m) {
    for (PeerId v : peers) os << (m + 1) << ' ' << v << ' ' << layers_[m].child(v) << '\n';
  }
  return os.str();
}

bool operator==(const Network& a, const Network& b) {
  if (a.flows_ != b.flows_ || a.layers_.size() != b.layers_.size()) return false;
  const auto peers = a.sorted_peers();
  if (peers != b.sorted_peers()) return false;
  for (std::size_t m = 0; m < a.layers_.size(); ++m) {
    for (PeerId v : peers) {
      if (a.layers_[m].child(v) != b.layers_[m].child(v)) return false;
    }
  }
  return true;
}

Network grow_network(int flows, std::uint32_t n, const RandomSource& rng) {
  if (n < 1) fail(Errc::invalid_parameter, "network size must be at least 1");
  Network net(flows);
  for (std::uint32_t i = 1; i < n; ++i) net.join(rng);
  return net;
}

std::vector<std::uint32_t> layer_image(const Network& net, int m) {
  std::vector<std::uint32_t> out;
  for (PeerId v : net.sorted_peers()) out.push_back(index_of(net.child(m, v)));
  return out;
}

std::map<LayerTuple, Rational> exact_layer_distribution(int n, int flows) {
  if (n < 1 || flows < 1) fail(Errc::invalid_parameter, "need n >= 1 and at least one layer");
  if (n > 6) fail(Errc::oracle_limit_exceeded, "exact enumeration is limited to n <= 6");
  std::uint64_t sequences = 1;
  for (int m = 0; m < flows; ++m) {
    sequences *= factorial(n);
    if (sequences > 10'000'000ULL) {
      fail(Errc::oracle_limit_exceeded, "too many draw sequences to enumerate");
    }
  }
  const Rational mass(1, static_cast<std::int64_t>(sequences));

  std::map<LayerTuple, Rational> dist;
  std::vector<PeerId> targets(static_cast<std::size_t>(flows));
  std::function<void(const Network&, int)> expand = [&](const Network& net, int next) {
    if (next > n) {
      LayerTuple key;
      for (int m = 0; m < flows; ++m) key.push_back(layer_image(net, m));
      dist[key] += mass;
      return;
    }
    // next^flows joint choices, each w_m uniform over peers 1..next.
    std::vector<std::uint32_t> digit(static_cast<std::size_t>(flows), 1);
    for (;;) {
      for (int m = 0; m < flows; ++m) targets[static_cast<std::size_t>(m)] = peer(digit[static_cast<std::size_t>(m)]);
      Network child = net;
      child.join_with(peer(static_cast<std::uint32_t>(next)), targets);
      expand(child, next + 1);
      int m = 0;
      while (m < flows && digit[static_cast<std::size_t>(m)] == static_cast<std::uint32_t>(next)) {
        digit[static_cast<std::size_t>(m)] = 1;
        ++m;
      }
      if (m == flows) break;
      ++digit[static_cast<std::size_t>(m)];
    }
  };
  expand(Network(flows), 2);
  return dist;
}

}  // namespace regraph
