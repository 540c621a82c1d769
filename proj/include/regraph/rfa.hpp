#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regraph/random.hpp"
#include "regraph/topology.hpp"

namespace regraph {

inline constexpr int kInfiniteDepth = -1;
inline constexpr int kAbsentDepth = -2;  // id not in the network

// Converged random flow assignment for one network snapshot. Tables are
// indexed by peer id; flows are numbered 1..M, 0 means unset.
struct RfaState {
  int flows = 0;
  int dstar = 0;
  double c = 0.5;
  std::uint32_t peer_count = 0;
  std::vector<int> depth;       // kInfiniteDepth when not reached within d*
  std::vector<int> main_flow;   // chi(v), 0 when unset
  std::vector<int> chosen;      // layer m* whose parent fixed depth/flow, -1 otherwise
  std::vector<std::uint8_t> labels;  // f_m(v) at [v * flows + m]; zero for the source

  int label(PeerId v, int m) const {
    return labels[static_cast<std::size_t>(index_of(v)) * static_cast<std::size_t>(flows) + static_cast<std::size_t>(m)];
  }
  int depth_of(PeerId v) const { return depth[index_of(v)]; }
  int flow_of(PeerId v) const { return main_flow[index_of(v)]; }

  // `v d(v) chi(v) f_1(v) .. f_M(v)` per peer in ascending id; d = -1 for
  // infinity, zero labels for the source.
  std::string dump(const Network& net) const;
};

// ceil(log2(n / ln(n)^c)), at least 1.
int dstar(std::uint64_t n, double c);

// Depth/main-flow propagation from the source to depth d*, then random
// completion of every peer's incoming labels. Uses only the first
// net.flows() layers.
RfaState compute_rfa(const Network& net, double c, const RandomSource& rng);

// Every peer's depth and main flow agree with the local rule applied to its
// parents, and every non-source label row is a permutation of 1..M.
bool is_local_fixpoint(const Network& net, const RfaState& state);

struct DepthHistogram {
  std::vector<std::uint64_t> count;  // N_0..N_{d*}
  std::uint64_t beyond = 0;          // peers with infinite depth
  std::uint64_t total = 0;

  std::uint64_t at(int d) const { return count.at(static_cast<std::size_t>(d)); }
  std::uint64_t within(int d) const;  // N_{<=d}
  std::uint64_t above(int d) const { return total - within(d); }  // N_{>d}
};

DepthHistogram depth_histogram(const RfaState& state);

// X_d for d = 0..d* (X_0 = 0). Two flows only.
std::vector<std::uint64_t> main_flow_counts(const RfaState& state);

}  // namespace regraph
