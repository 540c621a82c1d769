#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regraph/flowgraph.hpp"
#include "regraph/rfa.hpp"
#include "regraph/topology.hpp"

namespace regraph {

struct Chunk {
  int flow = 0;
  int seq = 0;  // generation slot
};

// First-reception slots of every chunk at every peer after a slotted FIFO
// run. The source "receives" its own chunk in the slot it generates it.
struct DeliveryLog {
  int flows = 0;
  int slots = 0;
  std::vector<PeerId> peers;
  std::vector<std::int32_t> rx;  // [(v * flows + f - 1) * slots + seq], -1 when never received

  std::uint64_t transmissions = 0;
  std::uint64_t duplicates = 0;     // a chunk arriving twice at one peer
  std::uint64_t mislabeled = 0;     // a chunk crossing an edge of another flow
  std::size_t max_queue = 0;        // longest queue seen at transmission time
  int max_uploads_per_slot = 0;

  int rx_slot(PeerId v, int flow, int seq) const {
    return rx[(static_cast<std::size_t>(index_of(v)) * static_cast<std::size_t>(flows) +
               static_cast<std::size_t>(flow - 1)) * static_cast<std::size_t>(slots) +
              static_cast<std::size_t>(seq)];
  }
  // rx - seq of the newest chunk received, -1 if none.
  int latest_delay(PeerId v, int flow) const;
  // Max over received chunks of rx - seq, -1 if none.
  int worst_delay(PeerId v) const;

  // `peer,flow,seq,rx_slot` for every received chunk.
  std::string csv() const;
};

// Runs `slots` slots: the source emits chunk (f, t) for every flow each
// slot, every edge forwards the head of its FIFO, and a chunk received in
// slot t becomes transmittable in slot t + 1. Topology is frozen.
DeliveryLog simulate(const Network& net, const RfaState& state, int slots);

struct DelayMismatch {
  PeerId peer = kNoPeer;
  int flow = 0;
  int distance = kUnreachable;
  int observed = -1;
};

struct DelayReport {
  std::size_t checked = 0;        // connected (peer, flow) pairs compared
  std::size_t rate_checked = 0;
  std::size_t rate_violations = 0;
  std::vector<DelayMismatch> mismatches;

  bool ok() const { return mismatches.empty() && rate_violations == 0; }
};

// Compares every delivery against seq + hop distance and checks one chunk
// per slot per flow over the last quarter of the horizon. Throws
// Errc::insufficient_slots when the horizon is shorter than the deepest
// tree peer + 1.
DelayReport verify_delay_equals_distance(const DeliveryLog& log, const DelayTable& table);

// `peer,flow,distance,steady_delay,connected`; -1 for an infinite distance or
// a missing delay.
std::string summary_csv(const DeliveryLog& log, const DelayTable& table);

}  // namespace regraph
