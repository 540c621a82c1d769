#include "regraph/rfa.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "regraph/error.hpp"

namespace regraph {
namespace {

constexpr std::uint64_t kTieTag = 0x7469650000000000ULL;    // "tie"
constexpr std::uint64_t kLabelTag = 0x6c61620000000000ULL;  // "lab"

std::size_t at(PeerId v) { return index_of(v); }

}  // namespace

int dstar(std::uint64_t n, double c) {
  if (!(c > 0.0 && c < 1.0)) fail(Errc::invalid_parameter, "c must lie in (0, 1)");
  if (n < 2) fail(Errc::invalid_parameter, "d* needs at least two peers");
  const double nd = static_cast<double>(n);
  const double value = std::ceil(std::log2(nd / std::pow(std::log(nd), c)));
  return std::max(1, static_cast<int>(value));
}

RfaState compute_rfa(const Network& net, double c, const RandomSource& rng) {
  if (!(c > 0.0 && c < 1.0)) fail(Errc::invalid_parameter, "c must lie in (0, 1)");
  const int flows = net.flows();
  const auto bound = net.id_bound();

  RfaState s;
  s.flows = flows;
  s.c = c;
  s.peer_count = static_cast<std::uint32_t>(net.size());
  s.dstar = net.size() >= 2 ? dstar(net.size(), c) : 1;
  s.depth.assign(bound, kAbsentDepth);
  s.main_flow.assign(bound, 0);
  s.chosen.assign(bound, -1);
  s.labels.assign(static_cast<std::size_t>(bound) * static_cast<std::size_t>(flows), 0);
  for (PeerId v : net.members()) s.depth[at(v)] = kInfiniteDepth;
  s.depth[at(kSource)] = 0;

  std::vector<int> ties;
  auto pick = [&](PeerId v, int parent_depth) {
    ties.clear();
    for (int m = 0; m < flows; ++m) {
      if (s.depth[at(net.parent(m, v))] == parent_depth) ties.push_back(m);
    }
    auto tie_rng = rng.derive(kTieTag, index_of(v));
    return ties[tie_rng.below(ties.size())];
  };

  // Depth 1: the source's children take the flow of the layer they hang on.
  std::vector<PeerId> frontier;
  for (int m = 0; m < flows; ++m) {
    const PeerId v = net.child(m, kSource);
    if (v == kSource || s.depth[at(v)] != kInfiniteDepth) continue;
    s.depth[at(v)] = 1;
    frontier.push_back(v);
  }
  for (PeerId v : frontier) {
    const int m = pick(v, 0);
    s.chosen[at(v)] = m;
    s.main_flow[at(v)] = m + 1;
  }

  // Breadth-first propagation; peers at depth d* do not propagate further.
  std::vector<PeerId> next;
  for (int level = 1; level < s.dstar && !frontier.empty(); ++level) {
    next.clear();
    for (PeerId u : frontier) {
      for (int m = 0; m < flows; ++m) {
        const PeerId v = net.child(m, u);
        if (s.depth[at(v)] != kInfiniteDepth) continue;
        s.depth[at(v)] = level + 1;
        next.push_back(v);
      }
    }
    for (PeerId v : next) {
      const int m = pick(v, level);
      s.chosen[at(v)] = m;
      s.main_flow[at(v)] = s.main_flow[at(net.parent(m, v))];
    }
    frontier.swap(next);
  }

  // Remaining incoming edges get a uniformly random completion.
  std::vector<std::uint8_t> pool;
  for (PeerId v : net.members()) {
    if (v == kSource) continue;
    const int fixed = s.chosen[at(v)];
    const int fixed_flow = s.main_flow[at(v)];
    pool.clear();
    for (int f = 1; f <= flows; ++f) {
      if (f != fixed_flow || fixed < 0) pool.push_back(static_cast<std::uint8_t>(f));
    }
    auto label_rng = rng.derive(kLabelTag, index_of(v));
    label_rng.shuffle(std::span<std::uint8_t>(pool));
    auto row = s.labels.begin() + static_cast<std::ptrdiff_t>(at(v) * static_cast<std::size_t>(flows));
    std::size_t next_label = 0;
    for (int m = 0; m < flows; ++m) {
      row[m] = m == fixed ? static_cast<std::uint8_t>(fixed_flow) : pool[next_label++];
    }
  }
  return s;
}

bool is_local_fixpoint(const Network& net, const RfaState& s) {
  const int flows = s.flows;
  std::vector<bool> seen(static_cast<std::size_t>(flows) + 1);
  for (PeerId v : net.members()) {
    if (v == kSource) {
      if (s.depth_of(v) != 0) return false;
      continue;
    }
    std::fill(seen.begin(), seen.end(), false);
    for (int m = 0; m < flows; ++m) {
      const int f = s.label(v, m);
      if (f < 1 || f > flows || seen[static_cast<std::size_t>(f)]) return false;
      seen[static_cast<std::size_t>(f)] = true;
    }

    int best = -1;
    for (int m = 0; m < flows; ++m) {
      const int pd = s.depth_of(net.parent(m, v));
      if (pd >= 0 && (best < 0 || pd < best)) best = pd;
    }
    const int chosen = s.chosen[index_of(v)];
    if (best < 0 || best >= s.dstar) {
      if (s.depth_of(v) != kInfiniteDepth || s.flow_of(v) != 0 || chosen != -1) return false;
      continue;
    }
    if (s.depth_of(v) != best + 1 || chosen < 0 || chosen >= flows) return false;
    const PeerId p = net.parent(chosen, v);
    if (s.depth_of(p) != best) return false;
    const int expected_flow = p == kSource ? chosen + 1 : s.flow_of(p);
    if (s.flow_of(v) != expected_flow || s.label(v, chosen) != expected_flow) return false;
  }
  return true;
}

std::string RfaState::dump(const Network& net) const {
  std::ostringstream os;
  for (PeerId v : net.sorted_peers()) {
    os << v << ' ' << depth_of(v) << ' ' << flow_of(v);
    for (int m = 0; m < flows; ++m) os << ' ' << label(v, m);
    os << '\n';
  }
  return os.str();
}

std::uint64_t DepthHistogram::within(int d) const {
  std::uint64_t sum = 0;
  for (int i = 0; i <= d && i < static_cast<int>(count.size()); ++i) sum += count[static_cast<std::size_t>(i)];
  return sum;
}

DepthHistogram depth_histogram(const RfaState& s) {
  DepthHistogram h;
  h.count.assign(static_cast<std::size_t>(s.dstar) + 1, 0);
  h.total = s.peer_count;
  for (int d : s.depth) {
    if (d >= 0) ++h.count[static_cast<std::size_t>(d)];
    else if (d == kInfiniteDepth) ++h.beyond;
  }
  return h;
}

std::vector<std::uint64_t> main_flow_counts(const RfaState& s) {
  if (s.flows != 2) fail(Errc::analysis_limited_to_two_flows, "main-flow counts need M = 2");
  std::vector<std::uint64_t> x(static_cast<std::size_t>(s.dstar) + 1, 0);
  for (std::size_t i = 0; i < s.depth.size(); ++i) {
    if (s.depth[i] >= 1 && s.main_flow[i] == 1) ++x[static_cast<std::size_t>(s.depth[i])];
  }
  return x;
}

}  // namespace regraph
