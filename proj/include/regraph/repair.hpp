#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regraph/flowgraph.hpp"
#include "regraph/rfa.hpp"
#include "regraph/topology.hpp"

namespace regraph {

// Appends k repair layers built from the same churn history with fresh
// draws. Stream layers (and so dissemination) are untouched.
void extend_layers(Network& net, int k, const RandomSource& rng);

// One (peer, flow) delivery obtained through repair. Either a direct
// request over an extra-layer edge, or inherited over ordinary flow edges
// from an upstream peer that was repaired.
struct RepairEntry {
  PeerId peer = kNoPeer;
  int flow = 0;
  PeerId helper = kNoPeer;  // extra-layer parent that injected the flow
  int layer = -1;           // extra layer used by a direct request, -1 otherwise
  bool via_cycle = false;
  int delay = 0;
};

struct RepairPlan {
  int extra = 0;
  std::vector<RepairEntry> entries;   // direct requests and inherited deliveries
  std::vector<PeerId> extra_uploaders;  // helpers, ascending, unique
  std::size_t disconnected_before = 0;  // peers missing at least one flow
  std::size_t disconnected_after = 0;
  int max_delay_before = 0;
  int max_delay_after = 0;              // includes repaired deliveries

  std::size_t requests() const;
  // `peer,flow,helper,served_via_cycle`
  std::string csv() const;
};

// Serves disconnected (peer, flow) pairs from the first k extra layers until
// nothing changes, earliest arrival first. Each extra edge carries at most
// one flow; a helper must already receive the flow; on equal arrival the
// ordinary flow edge wins, then the lower extra layer.
RepairPlan resolve_repairs(const Network& net, const RfaState& state,
                           const std::vector<Decomposition>& decs, int k);

}  // namespace regraph
