#include "regraph/dissemination.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

#include "regraph/error.hpp"

namespace regraph {

int DeliveryLog::latest_delay(PeerId v, int flow) const {
  for (int seq = slots; seq-- > 0;) {
    const int r = rx_slot(v, flow, seq);
    if (r >= 0) return r - seq;
  }
  return -1;
}

int DeliveryLog::worst_delay(PeerId v) const {
  int worst = -1;
  for (int f = 1; f <= flows; ++f) {
    for (int seq = 0; seq < slots; ++seq) {
      const int r = rx_slot(v, f, seq);
      if (r >= 0) worst = std::max(worst, r - seq);
    }
  }
  return worst;
}

std::string DeliveryLog::csv() const {
  std::ostringstream os;
  os << "peer,flow,seq,rx_slot\n";
  for (PeerId v : peers) {
    for (int f = 1; f <= flows; ++f) {
      for (int seq = 0; seq < slots; ++seq) {
        const int r = rx_slot(v, f, seq);
        if (r >= 0) os << v << ',' << f << ',' << seq << ',' << r << '\n';
      }
    }
  }
  return os.str();
}

DeliveryLog simulate(const Network& net, const RfaState& state, int slots) {
  if (slots < 1) fail(Errc::invalid_parameter, "simulation needs at least one slot");
  const int flows = net.flows();
  const auto M = static_cast<std::size_t>(flows);
  const auto bound = net.id_bound();

  DeliveryLog log;
  log.flows = flows;
  log.slots = slots;
  log.peers = net.sorted_peers();
  log.rx.assign(static_cast<std::size_t>(bound) * M * static_cast<std::size_t>(slots), -1);
  auto rx = [&](PeerId v, int f, int seq) -> std::int32_t& {
    return log.rx[(index_of(v) * M + static_cast<std::size_t>(f - 1)) * static_cast<std::size_t>(slots) +
                  static_cast<std::size_t>(seq)];
  };

  // Flow carried by u's m-th outgoing edge: the label its child put on it.
  std::vector<int> edge_flow(bound * M, 0);
  for (PeerId u : log.peers) {
    for (int m = 0; m < flows; ++m) {
      const PeerId c = net.child(m, u);
      if (c != kSource) edge_flow[index_of(u) * M + static_cast<std::size_t>(m)] = state.label(c, m);
    }
  }
  std::vector<std::deque<Chunk>> queue(bound * M);
  auto enqueue = [&](PeerId u, const Chunk& chunk) {
    for (std::size_t m = 0; m < M; ++m) {
      if (edge_flow[index_of(u) * M + m] == chunk.flow) queue[index_of(u) * M + m].push_back(chunk);
    }
  };

  struct Arrival {
    PeerId to;
    int layer;
    Chunk chunk;
  };
  std::vector<Arrival> arrivals;

  for (int t = 0; t < slots; ++t) {
    for (int f = 1; f <= flows; ++f) {
      rx(kSource, f, t) = t;
      enqueue(kSource, Chunk{f, t});
    }

    arrivals.clear();
    for (PeerId u : log.peers) {
      int uploads = 0;
      for (std::size_t m = 0; m < M; ++m) {
        auto& q = queue[index_of(u) * M + m];
        if (q.empty()) continue;
        log.max_queue = std::max(log.max_queue, q.size());
        arrivals.push_back({net.child(static_cast<int>(m), u), static_cast<int>(m), q.front()});
        q.pop_front();
        ++uploads;
      }
      log.max_uploads_per_slot = std::max(log.max_uploads_per_slot, uploads);
    }
    log.transmissions += arrivals.size();

    for (const auto& a : arrivals) {
      if (a.to == kSource || state.label(a.to, a.layer) != a.chunk.flow) {
        ++log.mislabeled;
        continue;
      }
      auto& slot = rx(a.to, a.chunk.flow, a.chunk.seq);
      if (slot >= 0) {
        ++log.duplicates;
        continue;
      }
      slot = t + 1;
      enqueue(a.to, a.chunk);
    }
  }
  return log;
}

DelayReport verify_delay_equals_distance(const DeliveryLog& log, const DelayTable& table) {
  if (log.slots < table.max_delay + 1) {
    fail(Errc::insufficient_slots, "horizon " + std::to_string(log.slots) + " shorter than max distance + 1 = " +
                                       std::to_string(table.max_delay + 1));
  }
  DelayReport rep;
  const int window = std::max(1, log.slots / 4);
  for (PeerId v : log.peers) {
    for (int f = 1; f <= log.flows; ++f) {
      const int h = table.at(v, f);
      DelayMismatch miss{v, f, h, -1};
      bool bad = false;
      int in_window = 0;
      for (int seq = 0; seq < log.slots; ++seq) {
        const int r = log.rx_slot(v, f, seq);
        const int expected = (h != kUnreachable && seq + h <= log.slots) ? seq + h : -1;
        if (r != expected && !bad) {
          bad = true;
          miss.observed = r < 0 ? -1 : r - seq;
        }
        if (r > log.slots - window) ++in_window;
      }
      if (h == kUnreachable) {
        if (bad) rep.mismatches.push_back(miss);
        continue;
      }
      ++rep.checked;
      if (bad) rep.mismatches.push_back(miss);
      // Rate only counts once the pipeline has filled before the window;
      // the source generates rather than receives.
      if (h > 0 && h <= log.slots - window) {
        ++rep.rate_checked;
        if (in_window != window) ++rep.rate_violations;
      }
    }
  }
  return rep;
}

std::string summary_csv(const DeliveryLog& log, const DelayTable& table) {
  std::ostringstream os;
  os << "peer,flow,distance,steady_delay,connected\n";
  for (PeerId v : log.peers) {
    for (int f = 1; f <= log.flows; ++f) {
      const int h = table.at(v, f);
      os << v << ',' << f << ',' << h << ',' << log.latest_delay(v, f) << ','
         << (h != kUnreachable ? "true" : "false") << '\n';
    }
  }
  return os.str();
}

}  // namespace regraph
