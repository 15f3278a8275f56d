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

// Street-network cleanup and per-zone road metrics.

#ifndef DHM_TOPOLOGY_H_
#define DHM_TOPOLOGY_H_

#include <cstddef>
#include <string>
#include <vector>

#include "dhm/graph.h"

namespace dhm {

// Length ledger of a simplification run:
//   length_before = length_after + self_loop_length + merged_length
struct SimplifySummary {
  std::size_t nodes_before = 0;
  std::size_t nodes_after = 0;
  std::size_t edges_before = 0;
  std::size_t edges_after = 0;
  double length_before = 0.0;
  double length_after = 0.0;
  std::size_t self_loops_dropped = 0;
  double self_loop_length = 0.0;  // includes collapsed pure cycles
  std::size_t cycles_collapsed = 0;
  std::size_t parallels_merged = 0;
  double merged_length = 0.0;  // length of the longer parallels discarded
  std::size_t passes = 0;

  std::string ToText() const;
};

struct SimplifyResult {
  Graph graph;
  SimplifySummary summary;
};

// Contracts every degree-2 node into a single edge spanning its chain
// (weights summed), repeating until no degree-2 node remains. A chain that
// returns to its start becomes a self-loop and is dropped; a pure cycle
// keeps its lowest-id node, isolated. Parallel edges created by
// contraction keep the minimum weight. Surviving nodes keep their labels
// and relative order.
SimplifyResult SimplifyTopology(const Graph& g);

// Each round removes every node whose current degree is 1.
Graph PruneDeadEnds(const Graph& g, int rounds);

// Subgraph induced by `keep` (true = retained), preserving order.
Graph InducedSubgraph(const Graph& g, const std::vector<bool>& keep);

struct ZoneMetrics {
  std::string zone;
  double road_density = 0.0;       // intra-zone length / area
  double num_node_per_area = 0.0;  // zone nodes / area
  double num_road_per_area = 0.0;  // intra-zone edges / area
  double sum_deg = 0.0;            // full-graph degrees over zone nodes
  double sub_sum_nodes = 0.0;      // zone node count
  double sub_sum_cent = 0.0;       // sum of deg(v) / (N - 1)
};

// `areas` is aligned with assignment.zones(); every area must be > 0.
// An intra-zone edge has both endpoints in the zone.
std::vector<ZoneMetrics> ComputeNetworkMetrics(const Graph& g,
                                               const TractAssignment& assignment,
                                               const std::vector<double>& areas);

// zone,road_density,num_node_per_area,num_road_per_area,sum_deg,
// sub_sum_nodes,sub_sum_cent
std::string MetricsCsv(const std::vector<ZoneMetrics>& metrics);

}  // namespace dhm

#endif  // DHM_TOPOLOGY_H_
