#include <deque>

#include "gridxpand/network.hpp"

namespace gridxpand {

std::vector<int> Topology::path_to(int bus) const {
  std::vector<int> path;
  for (int b = bus; parent_segment[b] >= 0; b = from_bus[parent_segment[b]]) {
    path.push_back(parent_segment[b]);
  }
  return {path.rbegin(), path.rend()};
}

Topology analyze_topology(const FeederNetwork& net) {
  const int nb = static_cast<int>(net.buses.size());
  const int ns = static_cast<int>(net.segments.size());
  if (nb == 0) throw ValidationError("network has no buses");

  Topology t;
  t.from_bus.resize(ns);
  t.to_bus.resize(ns);
  t.child_segments.assign(nb, {});
  t.parent_segment.assign(nb, -1);
  t.depth.assign(nb, -1);

  std::vector<int> incoming(nb, 0);
  for (int s = 0; s < ns; ++s) {
    const auto& seg = net.segments[s];
    t.from_bus[s] = net.bus_index(seg.from_bus);
    t.to_bus[s] = net.bus_index(seg.to_bus);
    if (t.from_bus[s] == t.to_bus[s]) {
      throw ValidationError("segment " + seg.id + " connects bus " + seg.from_bus + " to itself");
    }
    t.child_segments[t.from_bus[s]].push_back(s);
    if (++incoming[t.to_bus[s]] > 1) {
      throw ValidationError("radiality violation: bus " + seg.to_bus +
                            " is fed by more than one segment (cycle through segment " + seg.id +
                            ")");
    }
    t.parent_segment[t.to_bus[s]] = s;
  }
  if (ns != nb - 1) {
    throw ValidationError("radiality violation: " + std::to_string(ns) + " segments for " +
                          std::to_string(nb) + " buses (expected |buses| - 1)");
  }

  const int head = net.feeder_head_index();
  t.root_bus = t.from_bus[head];
  if (t.parent_segment[t.root_bus] != -1) {
    throw ValidationError("feeder head must start at the substation bus " +
                          net.buses[t.root_bus].id);
  }

  std::deque<int> queue{t.root_bus};
  t.depth[t.root_bus] = 0;
  while (!queue.empty()) {
    int b = queue.front();
    queue.pop_front();
    t.bus_order.push_back(b);
    for (int s : t.child_segments[b]) {
      int c = t.to_bus[s];
      if (t.depth[c] >= 0) {
        throw ValidationError("radiality violation: cycle through segment " + net.segments[s].id);
      }
      t.depth[c] = t.depth[b] + 1;
      t.segment_order.push_back(s);
      queue.push_back(c);
    }
  }
  for (int b = 0; b < nb; ++b) {
    if (t.depth[b] < 0) {
      throw ValidationError("bus " + net.buses[b].id +
                            " is disconnected from the feeder head or segment orientation "
                            "points toward the substation");
    }
  }
  return t;
}

}  // namespace gridxpand
