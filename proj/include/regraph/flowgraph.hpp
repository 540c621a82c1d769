#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regraph/rfa.hpp"
#include "regraph/topology.hpp"

namespace regraph {

inline constexpr int kUnreachable = -1;

struct InEdge {
  PeerId parent = kNoPeer;
  int layer = -1;
};

// Subgraph of edges carrying one flow: exactly one incoming edge per
// non-source peer, none for the source.
struct FlowGraph {
  int flow = 0;
  std::vector<PeerId> peers;    // ascending
  std::vector<InEdge> in_edge;  // indexed by peer id

  const InEdge& incoming(PeerId v) const { return in_edge[index_of(v)]; }
  // Flow-f children of every peer, indexed by id, ascending.
  std::vector<std::vector<PeerId>> children() const;
};

FlowGraph build_flow_graph(const Network& net, const RfaState& state, int flow);

// A cycle of the flow graph plus the peers hanging below it. Neither gets
// any chunk of the flow from the source.
struct CycleComponent {
  std::vector<PeerId> cycle;    // flow direction, starting at the smallest id
  std::vector<PeerId> hanging;  // ascending
};

struct Decomposition {
  int flow = 0;
  std::vector<PeerId> tree;        // ascending
  std::vector<int> distance;       // hops from the source; kUnreachable off the tree
  std::vector<CycleComponent> cycles;  // ordered by first cycle id

  int distance_of(PeerId v) const { return distance[index_of(v)]; }
  std::size_t disconnected() const;

  // `v dist(v)` for tree peers, then `cycle: v1 .. vk` per cycle, each
  // followed by `hanging: ...` when peers hang below it.
  std::string dump() const;
};

Decomposition decompose(const FlowGraph& fg);

// Shell sizes S_h, remaining counts S_{>h} and ratios gamma_h for flow 1.
struct ContractionStats {
  std::uint64_t n = 0;
  double threshold = 0.0;                  // N / exp(ln(N)^(1-c))
  std::vector<std::uint64_t> shell;        // S_0, S_1, ...
  std::vector<std::uint64_t> remaining;    // S_{>0}, S_{>1}, ...
  std::vector<std::array<std::uint64_t, 2>> remaining_by_layer;  // S_{>h,m}
  std::vector<double> gamma;               // gamma[h] for h >= 1; gamma[0] unused
  std::optional<int> h_star;

  // `h,S_h,S_gt_h,gamma_h`; gamma_0 is left empty.
  std::string csv() const;
};

ContractionStats contraction_stats(const Network& net, const RfaState& state,
                                   const FlowGraph& flow1);

struct DelayTable {
  int flows = 0;
  std::vector<PeerId> peers;   // ascending
  std::vector<int> distance;   // [v * flows + (f - 1)], kUnreachable when disconnected
  std::vector<int> worst;      // max finite distance per peer, kUnreachable if none
  std::vector<bool> connected; // connected in every flow
  int max_delay = 0;           // max finite distance over all (peer, flow)

  int at(PeerId v, int flow) const {
    return distance[static_cast<std::size_t>(index_of(v)) * static_cast<std::size_t>(flows) + static_cast<std::size_t>(flow - 1)];
  }
  std::size_t disconnected_peers() const;
};

DelayTable distance_delay_table(const Network& net, const std::vector<Decomposition>& flows);

// All flow graphs and their decompositions, flow 1 first.
std::vector<Decomposition> decompose_all(const Network& net, const RfaState& state);

}  // namespace regraph
