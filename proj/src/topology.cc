// Copyright 2026 The DHM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dhm/topology.h"

#include <algorithm>
#include <map>
#include <sstream>
#include <utility>

#include "dhm/error.h"
#include "dhm/text.h"

namespace dhm {
namespace {

// Offset of the directed edge from `v` to `to`.
std::size_t EdgeSlot(const Graph& g, NodeId v, NodeId to) {
  const auto nb = g.neighbors(v);
  for (std::size_t k = 0; k < nb.size(); ++k) {
    if (nb[k].id == to) return g.edge_offset(v) + k;
  }
  return g.directed_edge_count();
}

// One contraction pass. Returns false when `g` has no degree-2 node.
bool ContractOnce(const Graph& g, SimplifySummary& s, Graph& out) {
  const std::size_t n = g.node_count();
  std::vector<bool> interior(n, false);
  bool any = false;
  for (NodeId v = 0; v < n; ++v) {
    interior[v] = g.degree(v) == 2;
    any = any || interior[v];
  }
  if (!any) return false;

  std::vector<bool> used(g.directed_edge_count(), false);
  std::vector<bool> node_seen(n, false);
  const auto mark = [&](NodeId a, NodeId b) {
    used[EdgeSlot(g, a, b)] = true;
    used[EdgeSlot(g, b, a)] = true;
  };

  struct Path {
    NodeId a, b;
    double length;
  };
  std::vector<Path> paths;
  for (NodeId e = 0; e < n; ++e) {
    if (interior[e]) continue;
    const auto nb = g.neighbors(e);
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (used[g.edge_offset(e) + k]) continue;
      NodeId prev = e;
      NodeId cur = nb[k].id;
      double length = nb[k].weight;
      mark(prev, cur);
      while (interior[cur]) {
        node_seen[cur] = true;
        const auto cn = g.neighbors(cur);
        const Neighbor& next = cn[0].id == prev ? cn[1] : cn[0];
        mark(cur, next.id);
        length += next.weight;
        prev = cur;
        cur = next.id;
      }
      paths.push_back({e, cur, length});
    }
  }

  // Whatever interior nodes remain form pure cycles.
  std::vector<bool> keep(n, false);
  for (NodeId v = 0; v < n; ++v) keep[v] = !interior[v];
  for (NodeId v = 0; v < n; ++v) {
    if (!interior[v] || node_seen[v]) continue;
    keep[v] = true;  // lowest id of its cycle
    double length = 0.0;
    NodeId prev = v;
    NodeId cur = v;
    do {
      node_seen[cur] = true;
      const auto cn = g.neighbors(cur);
      const Neighbor& next =
          (cur == v) ? cn[0] : (cn[0].id == prev ? cn[1] : cn[0]);
      length += next.weight;
      prev = cur;
      cur = next.id;
    } while (cur != v);
    ++s.cycles_collapsed;
    ++s.self_loops_dropped;
    s.self_loop_length += length;
  }

  std::vector<NodeId> new_id(n, 0);
  std::vector<std::string> labels;
  for (NodeId v = 0; v < n; ++v) {
    if (!keep[v]) continue;
    new_id[v] = static_cast<NodeId>(labels.size());
    labels.push_back(g.label(v));
  }

  std::map<std::pair<NodeId, NodeId>, double> merged;
  for (const Path& p : paths) {
    if (p.a == p.b) {
      ++s.self_loops_dropped;
      s.self_loop_length += p.length;
      continue;
    }
    const auto key = std::minmax(new_id[p.a], new_id[p.b]);
    auto [it, inserted] = merged.emplace(key, p.length);
    if (!inserted) {
      ++s.parallels_merged;
      s.merged_length += std::max(it->second, p.length);
      it->second = std::min(it->second, p.length);
    }
  }
  std::vector<Edge> edges;
  edges.reserve(merged.size());
  for (const auto& [key, w] : merged) edges.push_back({key.first, key.second, w});
  out = Graph::FromEdges(std::move(labels), edges);
  return true;
}

}  // namespace

std::string SimplifySummary::ToText() const {
  std::ostringstream os;
  os << "nodes_before = " << nodes_before << '\n'
     << "nodes_after = " << nodes_after << '\n'
     << "edges_before = " << edges_before << '\n'
     << "edges_after = " << edges_after << '\n'
     << "length_before = " << FormatDouble(length_before) << '\n'
     << "length_after = " << FormatDouble(length_after) << '\n'
     << "self_loops_dropped = " << self_loops_dropped << '\n'
     << "self_loop_length = " << FormatDouble(self_loop_length) << '\n'
     << "cycles_collapsed = " << cycles_collapsed << '\n'
     << "parallels_merged = " << parallels_merged << '\n'
     << "merged_length = " << FormatDouble(merged_length) << '\n'
     << "passes = " << passes << '\n';
  return os.str();
}

SimplifyResult SimplifyTopology(const Graph& g) {
  SimplifyResult r;
  SimplifySummary& s = r.summary;
  s.nodes_before = g.node_count();
  s.edges_before = g.edge_count();
  s.length_before = g.total_length();

  r.graph = g;
  Graph next;
  while (ContractOnce(r.graph, s, next)) {
    r.graph = std::move(next);
    ++s.passes;
  }
  s.nodes_after = r.graph.node_count();
  s.edges_after = r.graph.edge_count();
  s.length_after = r.graph.total_length();
  return r;
}

Graph InducedSubgraph(const Graph& g, const std::vector<bool>& keep) {
  std::vector<NodeId> new_id(g.node_count(), 0);
  std::vector<std::string> labels;
  for (NodeId v = 0; v < g.node_count(); ++v) {
    if (!keep[v]) continue;
    new_id[v] = static_cast<NodeId>(labels.size());
    labels.push_back(g.label(v));
  }
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    if (keep[e.a] && keep[e.b]) edges.push_back({new_id[e.a], new_id[e.b], e.weight});
  }
  return Graph::FromEdges(std::move(labels), edges);
}

Graph PruneDeadEnds(const Graph& g, int rounds) {
  if (rounds < 0) throw UsageError("prune rounds must be >= 0");
  Graph cur = g;
  for (int r = 0; r < rounds; ++r) {
    std::vector<bool> keep(cur.node_count());
    bool removed = false;
    for (NodeId v = 0; v < cur.node_count(); ++v) {
      keep[v] = cur.degree(v) != 1;
      removed = removed || !keep[v];
    }
    if (!removed) break;
    cur = InducedSubgraph(cur, keep);
  }
  return cur;
}

std::vector<ZoneMetrics> ComputeNetworkMetrics(const Graph& g,
                                               const TractAssignment& assignment,
                                               const std::vector<double>& areas) {
  if (assignment.node_count() != g.node_count()) {
    throw UsageError("zone assignment does not match the graph");
  }
  if (areas.size() != assignment.zone_count()) {
    throw UsageError("expected one area per zone");
  }
  const std::size_t zones = assignment.zone_count();
  std::vector<double> length(zones, 0.0);
  std::vector<double> roads(zones, 0.0);
  for (const Edge& e : g.edges()) {
    const std::size_t za = assignment.zone_index_of(e.a);
    if (za != assignment.zone_index_of(e.b)) continue;
    length[za] += e.weight;
    roads[za] += 1.0;
  }

  const double denom = g.node_count() > 1 ? static_cast<double>(g.node_count() - 1) : 0.0;
  std::vector<ZoneMetrics> out(zones);
  for (std::size_t z = 0; z < zones; ++z) {
    const double area = areas[z];
    if (!(area > 0.0)) {
      throw DataError("zone '" + assignment.zones()[z] + "' has non-positive area");
    }
    ZoneMetrics& m = out[z];
    m.zone = assignment.zones()[z];
    const auto nodes = assignment.zone_nodes_at(z);
    double deg = 0.0;
    for (NodeId v : nodes) deg += static_cast<double>(g.degree(v));
    m.road_density = length[z] / area;
    m.num_node_per_area = static_cast<double>(nodes.size()) / area;
    m.num_road_per_area = roads[z] / area;
    m.sum_deg = deg;
    m.sub_sum_nodes = static_cast<double>(nodes.size());
    m.sub_sum_cent = denom > 0.0 ? deg / denom : 0.0;
  }
  return out;
}

std::string MetricsCsv(const std::vector<ZoneMetrics>& metrics) {
  std::ostringstream os;
  os << "zone,road_density,num_node_per_area,num_road_per_area,sum_deg,"
        "sub_sum_nodes,sub_sum_cent\n";
  for (const auto& m : metrics) {
    os << m.zone << ',' << FormatDouble(m.road_density) << ','
       << FormatDouble(m.num_node_per_area) << ',' << FormatDouble(m.num_road_per_area)
       << ',' << FormatDouble(m.sum_deg) << ',' << FormatDouble(m.sub_sum_nodes) << ','
       << FormatDouble(m.sub_sum_cent) << '\n';
  }
  return os.str();
}

}  // namespace dhm
