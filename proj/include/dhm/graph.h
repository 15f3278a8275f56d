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

// Undirected weighted road network and the node-to-zone assignment.
//
// Nodes are intersections, edges are road segments weighted by length.
// External node labels are arbitrary strings; internally nodes are dense
// ids 0..N-1 so that per-node tables (alias tables, embedding rows) can be
// indexed directly.

#ifndef DHM_GRAPH_H_
#define DHM_GRAPH_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace dhm {

using NodeId = std::uint32_t;

struct Neighbor {
  NodeId id;
  double weight;
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

// Undirected edge between two internal ids, a < b after construction.
struct Edge {
  NodeId a;
  NodeId b;
  double weight;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// One row of an external edge list.
struct EdgeRecord {
  std::string a;
  std::string b;
  double weight = 0.0;
  std::size_t line = 0;  // source line for diagnostics, 0 if unknown
};

// Immutable compressed adjacency. Neighbor lists are sorted by id.
class Graph {
 public:
  Graph() = default;

  // Builds from internal edges. Edges must be simple (no self-loops, no
  // duplicates, positive weights); labels.size() defines the node count.
  static Graph FromEdges(std::vector<std::string> labels,
                         const std::vector<Edge>& edges);

  std::size_t node_count() const { return labels_.size(); }
  std::size_t edge_count() const { return neighbors_.size() / 2; }

  // Throws UsageError for an out-of-range id.
  std::span<const Neighbor> neighbors(NodeId v) const;
  std::size_t degree(NodeId v) const { return neighbors(v).size(); }

  // Position of the directed edge v->neighbors(v)[k] in the flat adjacency.
  std::size_t edge_offset(NodeId v) const { return offsets_[v]; }
  std::size_t directed_edge_count() const { return neighbors_.size(); }
  const Neighbor& directed_edge(std::size_t e) const { return neighbors_[e]; }

  bool has_edge(NodeId a, NodeId b) const;
  std::optional<double> edge_weight(NodeId a, NodeId b) const;

  const std::string& label(NodeId v) const { return labels_[v]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<NodeId> find(const std::string& label) const;

  // Each undirected edge once, with a < b, in (a, b) order.
  std::vector<Edge> edges() const;
  double total_length() const;

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> neighbors_;
};

struct BuildResult {
  Graph graph;
  std::size_t self_loops = 0;
  std::size_t merged_duplicates = 0;
};

// Internalizes labels in order of first appearance, drops self-loops
// (counted), merges duplicate pairs keeping the minimum weight. Throws
// DataError on a non-positive or non-finite weight.
BuildResult BuildGraph(std::span<const EdgeRecord> edges);

// Maps every node to exactly one zone; every zone is non-empty.
class TractAssignment {
 public:
  TractAssignment() = default;

  // zone_of[v] is the zone label of node v. Zones are ordered by first
  // appearance along node ids unless `zone_order` is given, in which case
  // zones absent from zone_of are dropped from the order.
  TractAssignment(std::vector<std::string> zone_of,
                  const std::vector<std::string>& zone_order = {});

  std::size_t node_count() const { return zone_index_of_.size(); }
  std::size_t zone_count() const { return zones_.size(); }
  const std::vector<std::string>& zones() const { return zones_; }

  const std::string& zone_of(NodeId v) const;
  std::size_t zone_index_of(NodeId v) const { return zone_index_of_[v]; }

  // Throws UsageError for an unknown zone.
  std::span<const NodeId> zone_nodes(const std::string& zone) const;
  std::span<const NodeId> zone_nodes_at(std::size_t zone_index) const {
    return members_[zone_index];
  }
  std::optional<std::size_t> find_zone(const std::string& zone) const;

 private:
  std::vector<std::string> zones_;
  std::unordered_map<std::string, std::size_t> zone_index_;
  std::vector<std::size_t> zone_index_of_;
  std::vector<std::vector<NodeId>> members_;
};

// Builds an assignment for `g` from a label->zone map. Nodes missing from
// the map raise DataError; map entries for absent nodes are ignored.
TractAssignment AssignZones(
    const Graph& g, const std::unordered_map<std::string, std::string>& map,
    const std::vector<std::string>& zone_order = {});

}  // namespace dhm

#endif  // DHM_GRAPH_H_
