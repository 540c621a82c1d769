#include "doctest.h"
#include "regraph/analysis.hpp"
#include "regraph/error.hpp"
#include "regraph/flowgraph.hpp"

using namespace regraph;

namespace {

FlowGraph manual(std::uint32_t n, std::vector<std::pair<std::uint32_t, std::uint32_t>> edges) {
  FlowGraph fg;
  fg.flow = 1;
  for (std::uint32_t v = 1; v <= n; ++v) fg.peers.push_back(peer(v));
  fg.in_edge.assign(n + 1, InEdge{});
  for (auto [child, parent] : edges) fg.in_edge[child] = InEdge{peer(parent), 0};
  return fg;
}

}  // namespace

TEST_CASE("a chain decomposes into a tree with hop distances") {
  const FlowGraph fg = manual(3, {{2, 1}, {3, 2}});
  const Decomposition d = decompose(fg);
  CHECK(d.tree == std::vector<PeerId>{peer(1), peer(2), peer(3)});
  CHECK(d.distance_of(peer(1)) == 0);
  CHECK(d.distance_of(peer(2)) == 1);
  CHECK(d.distance_of(peer(3)) == 2);
  CHECK(d.cycles.empty());
  CHECK(decomposition_is_partition(fg, d));
}

TEST_CASE("a two-cycle is cut off from the source") {
  const FlowGraph fg = manual(4, {{2, 3}, {3, 2}, {4, 3}});
  const Decomposition d = decompose(fg);
  CHECK(d.tree == std::vector<PeerId>{kSource});
  REQUIRE(d.cycles.size() == 1);
  CHECK(d.cycles[0].cycle == std::vector<PeerId>{peer(2), peer(3)});
  CHECK(d.cycles[0].hanging == std::vector<PeerId>{peer(4)});
  CHECK(d.distance_of(peer(2)) == kUnreachable);
  CHECK(d.disconnected() == 3);
  CHECK(decomposition_is_partition(fg, d));
  CHECK(d.dump() == "1 0\ncycle: 2 3\nhanging: 4\n");
}

TEST_CASE("flow graphs of random networks are a tree plus cycles") {
  const RandomSource rng(77);
  for (int flows : {2, 3, 4}) {
    const Network net = grow_network(flows, 1500, rng.derive(flows));
    const RfaState s = compute_rfa(net, 0.5, rng.derive(flows, 2));
    for (int f = 1; f <= flows; ++f) {
      const FlowGraph fg = build_flow_graph(net, s, f);
      CHECK(fg.incoming(kSource).parent == kNoPeer);
      for (PeerId v : fg.peers) {
        if (v == kSource) continue;
        const InEdge e = fg.incoming(v);
        CHECK(s.label(v, e.layer) == f);
        CHECK(net.parent(e.layer, v) == e.parent);
      }
      CHECK(decomposition_is_partition(fg, decompose(fg)));
    }
  }
}

TEST_CASE("delay table flags peers missing a flow") {
  const Network net = grow_network(2, 600, RandomSource(12));
  const RfaState s = compute_rfa(net, 0.5, RandomSource(13));
  const auto decs = decompose_all(net, s);
  const DelayTable t = distance_delay_table(net, decs);
  CHECK(t.at(kSource, 1) == 0);
  CHECK(t.at(kSource, 2) == 0);
  std::size_t missing = 0;
  for (PeerId v : net.sorted_peers()) {
    const bool on_cycle = decs[0].distance_of(v) < 0 || decs[1].distance_of(v) < 0;
    CHECK(t.connected[index_of(v)] == !on_cycle);
    missing += on_cycle ? 1 : 0;
  }
  CHECK(t.disconnected_peers() == missing);
  CHECK_THROWS_AS(build_flow_graph(net, s, 3), Error);
}

TEST_CASE("contraction shells of flow graph 1") {
  const Network net = grow_network(2, 10000, RandomSource(40));
  const RfaState s = compute_rfa(net, 0.5, RandomSource(41));
  const ContractionStats cs = contraction_stats(net, s, build_flow_graph(net, s, 1));
  CHECK(cs.n == 10000);
  REQUIRE(cs.shell.size() >= 2);
  CHECK(cs.remaining[0] == cs.n - cs.shell[0]);
  for (std::size_t h = 1; h < cs.shell.size(); ++h) {
    CHECK(cs.remaining[h] == cs.remaining[h - 1] - cs.shell[h]);
    CHECK(cs.gamma[h] == doctest::Approx(double(cs.remaining[h]) / double(cs.remaining[h - 1])));
  }
  CHECK(cs.csv().rfind("h,S_h,S_gt_h,gamma_h\n", 0) == 0);
  CHECK_THROWS_AS(contraction_stats(net, s, build_flow_graph(net, s, 2)), Error);
}
