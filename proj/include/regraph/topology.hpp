#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "regraph/random.hpp"

namespace regraph {

// Peer identifier. Peer 1 is the source; 0 is never a valid peer.
enum class PeerId : std::uint32_t {};

inline constexpr PeerId kNoPeer{0};
inline constexpr PeerId kSource{1};

constexpr std::uint32_t index_of(PeerId p) { return static_cast<std::uint32_t>(p); }
constexpr PeerId peer(std::uint32_t i) { return PeerId{i}; }

inline std::ostream& operator<<(std::ostream& os, PeerId p) { return os << index_of(p); }

// One 1-regular digraph over the current peers, stored as a permutation with
// its inverse. Vectors are indexed by peer id; absent ids hold kNoPeer.
struct Layer {
  std::vector<PeerId> succ;
  std::vector<PeerId> pred;

  PeerId child(PeerId v) const { return succ[index_of(v)]; }
  PeerId parent(PeerId v) const { return pred[index_of(v)]; }
};

enum class ChurnKind { join, leave };

struct ChurnEvent {
  ChurnKind kind;
  PeerId peer;
};

// The overlay: `flows()` stream layers, optionally followed by extra layers
// reserved for repair. Every layer is a permutation of the same peer set.
class Network {
 public:
  // Source alone, with a loop in each of the `flows` layers.
  explicit Network(int flows);

  int flows() const { return flows_; }
  int extra_layers() const { return static_cast<int>(layers_.size()) - flows_; }
  int layer_count() const { return static_cast<int>(layers_.size()); }

  std::size_t size() const { return members_.size(); }
  bool contains(PeerId v) const;

  // Current peers in membership order (append on join, swap-remove on
  // leave). Join draws index into this sequence.
  std::span<const PeerId> members() const { return members_; }
  std::vector<PeerId> sorted_peers() const;

  // One past the largest id ever issued; sizes id-indexed tables.
  std::uint32_t id_bound() const { return next_id_; }
  PeerId next_id() const { return peer(next_id_); }

  const Layer& layer(int m) const { return layers_.at(static_cast<std::size_t>(m)); }
  PeerId child(int m, PeerId v) const { return layers_[static_cast<std::size_t>(m)].child(v); }
  PeerId parent(int m, PeerId v) const { return layers_[static_cast<std::size_t>(m)].parent(v); }

  // p_m(v) for every layer m, in layer order.
  std::vector<PeerId> parents(PeerId v) const;
  std::vector<PeerId> children(PeerId v) const;

  // Join with a freshly issued id; returns it.
  PeerId join(const RandomSource& rng);
  // Join a caller-chosen id. Ids are monotone: v must be >= next_id().
  void join(PeerId v, const RandomSource& rng);
  // Join with explicit break-in targets w_m, one per layer. A target equal
  // to v makes a loop in that layer.
  void join_with(PeerId v, std::span<const PeerId> targets);
  void leave(PeerId v);

  // Append k layers built by replaying the recorded churn history with
  // draws from `rng`. Replaying with the stream used for the original joins
  // gives exactly the layers the network would have had from the start.
  void extend_layers(int k, const RandomSource& rng);

  const std::vector<ChurnEvent>& history() const { return history_; }

  // Throws Errc::invariant_violation on a broken permutation or inverse.
  void check_invariants() const;

  // `N L` header then `m v c_m(v)` sorted by (m, v), layers numbered from 1.
  std::string dump() const;

  friend bool operator==(const Network& a, const Network& b);

 private:
  void insert_member(PeerId v);
  void remove_member(PeerId v);
  void grow_to(std::uint32_t bound);

  int flows_;
  std::vector<Layer> layers_;
  std::vector<PeerId> members_;
  std::vector<std::uint32_t> position_;  // index into members_, or kAbsent
  std::uint32_t next_id_ = 2;
  std::vector<ChurnEvent> history_;

  static constexpr std::uint32_t kAbsent = 0xffffffffu;
};

// Network of n peers grown by n - 1 joins drawn from `rng`.
Network grow_network(int flows, std::uint32_t n, const RandomSource& rng);

// Successor table of layer m listed in ascending peer order.
std::vector<std::uint32_t> layer_image(const Network& net, int m);

using Rational = boost::rational<std::int64_t>;
// Key: per layer, the successor of peers 1..N in order.
using LayerTuple = std::vector<std::vector<std::uint32_t>>;

// Exact law of the layer tuple after joins 2..n, by enumerating every
// sequence of break-in draws. Throws Errc::oracle_limit_exceeded for n > 6
// or more than 10^7 draw sequences.
std::map<LayerTuple, Rational> exact_layer_distribution(int n, int flows);

}  // namespace regraph
