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

#include "dhm/graph.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "dhm/error.h"

namespace dhm {

Graph Graph::FromEdges(std::vector<std::string> labels,
                       const std::vector<Edge>& edges) {
  Graph g;
  const std::size_t n = labels.size();
  g.labels_ = std::move(labels);
  g.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.index_.emplace(g.labels_[i], static_cast<NodeId>(i));
  }

  std::vector<std::size_t> degree(n, 0);
  for (const Edge& e : edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t v = 0; v < n; ++v) g.offsets_[v + 1] = g.offsets_[v] + degree[v];
  g.neighbors_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const Edge& e : edges) {
    g.neighbors_[cursor[e.a]++] = {e.b, e.weight};
    g.neighbors_[cursor[e.b]++] = {e.a, e.weight};
  }
  for (std::size_t v = 0; v < n; ++v) {
    std::sort(g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v]),
              g.neighbors_.begin() + static_cast<std::ptrdiff_t>(g.offsets_[v + 1]),
              [](const Neighbor& x, const Neighbor& y) { return x.id < y.id; });
  }
  return g;
}

std::span<const Neighbor> Graph::neighbors(NodeId v) const {
  if (v >= node_count()) {
    throw UsageError("node id " + std::to_string(v) + " out of range (" +
                     std::to_string(node_count()) + " nodes)");
  }
  return {neighbors_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
}

std::optional<double> Graph::edge_weight(NodeId a, NodeId b) const {
  const auto nb = neighbors(a);
  auto it = std::lower_bound(
      nb.begin(), nb.end(), b,
      [](const Neighbor& x, NodeId id) { return x.id < id; });
  if (it != nb.end() && it->id == b) return it->weight;
  return std::nullopt;
}

bool Graph::has_edge(NodeId a, NodeId b) const {
  return edge_weight(a, b).has_value();
}

std::optional<NodeId> Graph::find(const std::string& label) const {
  auto it = index_.find(label);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (NodeId v = 0; v < node_count(); ++v) {
    for (const Neighbor& nb : neighbors(v)) {
      if (v < nb.id) out.push_back({v, nb.id, nb.weight});
    }
  }
  return out;
}

double Graph::total_length() const {
  double total = 0.0;
  for (const Edge& e : edges()) total += e.weight;
  return total;
}

BuildResult BuildGraph(std::span<const EdgeRecord> edges) {
  BuildResult result;
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> index;
  const auto intern = [&](const std::string& label) {
    auto [it, inserted] =
        index.emplace(label, static_cast<NodeId>(labels.size()));
    if (inserted) labels.push_back(label);
    return it->second;
  };

  std::map<std::pair<NodeId, NodeId>, double> merged;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const EdgeRecord& rec = edges[i];
    if (!std::isfinite(rec.weight) || rec.weight <= 0.0) {
      const std::size_t where = rec.line ? rec.line : i + 1;
      throw DataError("edge row " + std::to_string(where) + " (" + rec.a +
                      "," + rec.b + "): weight must be positive and finite");
    }
    const NodeId a = intern(rec.a);
    const NodeId b = intern(rec.b);
    if (a == b) {
      ++result.self_loops;
      continue;
    }
    const auto key = std::minmax(a, b);
    auto [it, inserted] = merged.emplace(key, rec.weight);
    if (!inserted) {
      ++result.merged_duplicates;
      it->second = std::min(it->second, rec.weight);
    }
  }

  std::vector<Edge> simple;
  simple.reserve(merged.size());
  for (const auto& [key, w] : merged) simple.push_back({key.first, key.second, w});
  result.graph = Graph::FromEdges(std::move(labels), simple);
  return result;
}

TractAssignment::TractAssignment(std::vector<std::string> zone_of,
                                 const std::vector<std::string>& zone_order) {
  for (const std::string& z : zone_order) {
    if (zone_index_.count(z)) continue;
    zone_index_.emplace(z, zones_.size());
    zones_.push_back(z);
  }
  for (const std::string& z : zone_of) {
    if (zone_index_.count(z)) continue;
    zone_index_.emplace(z, zones_.size());
    zones_.push_back(z);
  }
  members_.assign(zones_.size(), {});
  zone_index_of_.resize(zone_of.size());
  for (std::size_t v = 0; v < zone_of.size(); ++v) {
    const std::size_t zi = zone_index_.at(zone_of[v]);
    zone_index_of_[v] = zi;
    members_[zi].push_back(static_cast<NodeId>(v));
  }

  // Drop zones listed in zone_order that received no node.
  const bool any_empty = std::any_of(members_.begin(), members_.end(),
                                     [](const auto& m) { return m.empty(); });
  if (any_empty) {
    std::vector<std::string> kept;
    std::vector<std::vector<NodeId>> kept_members;
    for (std::size_t z = 0; z < zones_.size(); ++z) {
      if (members_[z].empty()) continue;
      kept.push_back(zones_[z]);
      kept_members.push_back(std::move(members_[z]));
    }
    zones_ = std::move(kept);
    members_ = std::move(kept_members);
    zone_index_.clear();
    for (std::size_t z = 0; z < zones_.size(); ++z) {
      zone_index_.emplace(zones_[z], z);
      for (NodeId v : members_[z]) zone_index_of_[v] = z;
    }
  }
}

const std::string& TractAssignment::zone_of(NodeId v) const {
  if (v >= zone_index_of_.size()) {
    throw UsageError("node id " + std::to_string(v) + " out of range");
  }
  return zones_[zone_index_of_[v]];
}

std::optional<std::size_t> TractAssignment::find_zone(
    const std::string& zone) const {
  auto it = zone_index_.find(zone);
  if (it == zone_index_.end()) return std::nullopt;
  return it->second;
}

std::span<const NodeId> TractAssignment::zone_nodes(
    const std::string& zone) const {
  auto zi = find_zone(zone);
  if (!zi) throw UsageError("unknown zone: " + zone);
  return members_[*zi];
}

TractAssignment AssignZones(
    const Graph& g, const std::unordered_map<std::string, std::string>& map,
    const std::vector<std::string>& zone_order) {
  std::vector<std::string> zone_of(g.node_count());
  for (NodeId v = 0; v < g.node_count(); ++v) {
    auto it = map.find(g.label(v));
    if (it == map.end()) {
      throw DataError("node '" + g.label(v) + "' has no zone assignment");
    }
    zone_of[v] = it->second;
  }
  return TractAssignment(std::move(zone_of), zone_order);
}

}  // namespace dhm
