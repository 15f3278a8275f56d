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


#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "dhm/error.h"
#include "dhm/graph.h"
#include "dhm/topology.h"
#include "test_util.h"

namespace dhm {
namespace {

using testing::MakeGraph;

TEST_CASE("a path contracts to a single edge") {
  auto r = SimplifyTopology(testing::PathGraph(4));
  REQUIRE(r.graph.node_count() == 2);
  REQUIRE(r.graph.edge_count() == 1);
  CHECK(r.graph.label(0) == "0");
  CHECK(r.graph.label(1) == "3");
  CHECK(r.graph.edge_weight(0, 1).value() == 3.0);
  CHECK(r.summary.nodes_before == 4);
  CHECK(r.summary.nodes_after == 2);
}

TEST_CASE("a pure cycle collapses to a dropped self-loop") {
  auto r = SimplifyTopology(testing::CycleGraph(3));
  CHECK(r.graph.node_count() == 1);
  CHECK(r.graph.edge_count() == 0);
  CHECK(r.summary.cycles_collapsed == 1);
  CHECK(r.summary.self_loops_dropped == 1);
  CHECK(r.summary.self_loop_length == 3.0);
}

TEST_CASE("a star is unchanged") {
  const Graph g = testing::StarGraph(3);
  auto r = SimplifyTopology(g);
  CHECK(r.graph.edges() == g.edges());
  CHECK(r.summary.passes <= 1);
}

TEST_CASE("a loop hanging off a junction becomes a dropped self-loop") {
  // 0 is a junction (degree 3) with a loop 0-1-2-0 and a spur 0-3.
  const Graph g = MakeGraph(4, {{0, 1, 1}, {1, 2, 2}, {2, 0, 3}, {0, 3, 1}});
  auto r = SimplifyTopology(g);
  CHECK(r.summary.self_loops_dropped == 1);
  CHECK(r.summary.self_loop_length == 6.0);
  CHECK(r.graph.total_length() == 1.0);
}

TEST_CASE("parallel chains merge to the shorter one") {
  // Junctions 0 and 1, each with two spurs, joined by chains of length 2 and 5.
  const Graph g = MakeGraph(8, {{0, 2, 1}, {2, 1, 1}, {0, 3, 2}, {3, 1, 3}, {0, 4, 1},
                                {1, 5, 1}, {0, 6, 1}, {1, 7, 1}});
  auto r = SimplifyTopology(g);
  CHECK(r.summary.parallels_merged == 1);
  CHECK(r.summary.merged_length == 5.0);
  const auto a = r.graph.find("0").value();
  const auto b = r.graph.find("1").value();
  CHECK(r.graph.edge_weight(a, b).value() == 2.0);
}

TEST_CASE("dead-end pruning") {
  SUBCASE("path of three, one round") {
    Graph p = PruneDeadEnds(testing::PathGraph(3), 1);
    REQUIRE(p.node_count() == 1);
    CHECK(p.label(0) == "1");
    CHECK(p.degree(0) == 0);
  }
  SUBCASE("triangle is unchanged") {
    const Graph t = testing::CycleGraph(3);
    CHECK(PruneDeadEnds(t, 5).edges() == t.edges());
  }
  SUBCASE("zero rounds is the identity") {
    const Graph g = testing::TriangleTail();
    Graph p = PruneDeadEnds(g, 0);
    CHECK(p.labels() == g.labels());
    CHECK(p.edges() == g.edges());
  }
  SUBCASE("two rounds remove a two-node tail") {
    Graph p = PruneDeadEnds(testing::TriangleTail(), 2);
    CHECK(p.node_count() == 3);
  }
  SUBCASE("negative rounds") {
    CHECK_THROWS_AS(PruneDeadEnds(testing::PathGraph(3), -1), UsageError);
  }
}

TEST_CASE("zone metrics") {
  SUBCASE("triangle zone") {
    const Graph g = testing::CycleGraph(3);
    TractAssignment t({"A", "A", "A"});
    auto m = ComputeNetworkMetrics(g, t, {1.0});
    REQUIRE(m.size() == 1);
    CHECK(m[0].road_density == 3.0);
    CHECK(m[0].sub_sum_nodes == 3.0);
    CHECK(m[0].sum_deg == 6.0);
    CHECK(m[0].num_road_per_area == 3.0);
  }
  SUBCASE("isolated node zone") {
    const Graph g = MakeGraph(3, {{0, 1}});
    TractAssignment t({"A", "A", "B"});
    auto m = ComputeNetworkMetrics(g, t, {1.0, 2.0});
    CHECK(m[1].road_density == 0.0);
    CHECK(m[1].num_node_per_area == 0.5);
  }
  SUBCASE("hub zone") {
    const Graph g = testing::StarGraph(4);
    TractAssignment t({"H", "L", "L", "L", "L"});
    auto m = ComputeNetworkMetrics(g, t, {1.0, 1.0});
    CHECK(m[0].sub_sum_cent == 1.0);
    CHECK(m[1].sub_sum_cent == 1.0);  // four leaves of degree 1
  }
  SUBCASE("non-positive area") {
    TractAssignment t({"A", "A", "A"});
    CHECK_THROWS_AS(ComputeNetworkMetrics(testing::CycleGraph(3), t, {0.0}), DataError);
  }
}

TEST_CASE("metrics csv header") {
  const std::string csv = MetricsCsv({});
  CHECK(csv ==
        "zone,road_density,num_node_per_area,num_road_per_area,sum_deg,sub_sum_nodes,"
        "sub_sum_cent\n");
}

}  // namespace
}  // namespace dhm
