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
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "dhm/error.h"
#include "dhm/graph.h"
#include "dhm/ingest.h"
#include "dhm/text.h"
#include "test_util.h"

namespace dhm {
namespace {

using testing::MakeGraph;

std::vector<EdgeRecord> Records(
    const std::vector<std::tuple<std::string, std::string, double>>& rows) {
  std::vector<EdgeRecord> out;
  for (const auto& [a, b, w] : rows) out.push_back({a, b, w, 0});
  return out;
}

TEST_CASE("triangle builds three nodes of degree two") {
  auto r = BuildGraph(Records({{"a", "b", 1}, {"b", "c", 1}, {"c", "a", 1}}));
  REQUIRE(r.graph.node_count() == 3);
  CHECK(r.graph.edge_count() == 3);
  for (NodeId v = 0; v < 3; ++v) CHECK(r.graph.degree(v) == 2);
}

TEST_CASE("duplicate pairs keep the minimum weight") {
  auto r = BuildGraph(Records({{"a", "b", 5}, {"b", "a", 3}}));
  REQUIRE(r.graph.edge_count() == 1);
  CHECK(r.graph.edge_weight(0, 1).value() == 3.0);
  CHECK(r.merged_duplicates == 1);
}

TEST_CASE("self-loops are dropped and counted") {
  auto r = BuildGraph(Records({{"a", "a", 2}, {"a", "b", 1}}));
  CHECK(r.graph.node_count() == 2);
  CHECK(r.graph.edge_count() == 1);
  CHECK(r.self_loops == 1);
}

TEST_CASE("non-positive or non-finite weights are data errors") {
  CHECK_THROWS_AS(BuildGraph(Records({{"a", "b", 0}})), DataError);
  CHECK_THROWS_AS(BuildGraph(Records({{"a", "b", -1}})), DataError);
  CHECK_THROWS_AS(BuildGraph(Records({{"a", "b", std::nan("")}})), DataError);
}

TEST_CASE("labels are interned in order of first appearance") {
  auto r = BuildGraph(Records({{"x", "y", 1}, {"z", "x", 1}}));
  CHECK(r.graph.labels() == std::vector<std::string>{"x", "y", "z"});
  CHECK(r.graph.find("z").value() == 2);
  CHECK_FALSE(r.graph.find("w").has_value());
}

TEST_CASE("neighbor queries") {
  SUBCASE("triangle node 0") {
    Graph g = MakeGraph(3, {{0, 1}, {1, 2}, {0, 2}});
    auto nb = g.neighbors(0);
    REQUIRE(nb.size() == 2);
    CHECK(nb[0] == Neighbor{1, 1.0});
    CHECK(nb[1] == Neighbor{2, 1.0});
  }
  SUBCASE("isolated node") {
    Graph g = MakeGraph(2, {});
    CHECK(g.neighbors(1).empty());
  }
  SUBCASE("path middle node") {
    Graph g = MakeGraph(3, {{0, 1, 2.5}, {1, 2, 4.0}});
    auto nb = g.neighbors(1);
    REQUIRE(nb.size() == 2);
    CHECK(nb[0] == Neighbor{0, 2.5});
    CHECK(nb[1] == Neighbor{2, 4.0});
  }
  SUBCASE("out of range id") {
    Graph g = MakeGraph(2, {{0, 1}});
    CHECK_THROWS_AS(g.neighbors(2), UsageError);
  }
}

TEST_CASE("zone membership") {
  SUBCASE("two zones of two") {
    TractAssignment t({"A", "B", "A", "B"});
    auto a = t.zone_nodes("A");
    CHECK(std::vector<NodeId>(a.begin(), a.end()) == std::vector<NodeId>{0, 2});
  }
  SUBCASE("single zone holds every node") {
    TractAssignment t({"Z", "Z", "Z"});
    CHECK(t.zone_nodes("Z").size() == 3);
  }
  SUBCASE("absent zone") {
    TractAssignment t({"A"});
    CHECK_THROWS_AS(t.zone_nodes("Z"), UsageError);
  }
  SUBCASE("explicit order drops zones without nodes") {
    TractAssignment t({"B", "A"}, {"A", "C", "B"});
    CHECK(t.zones() == std::vector<std::string>{"A", "B"});
    CHECK(t.zone_nodes("A").size() == 1);
    CHECK(t.zone_nodes("B").size() == 1);
    CHECK(t.zone_of(0) == "B");
  }
}

TEST_CASE("unassigned node is a data error") {
  Graph g = MakeGraph(2, {{0, 1}});
  CHECK_THROWS_AS(AssignZones(g, {{"0", "A"}}), DataError);
  auto t = AssignZones(g, {{"0", "A"}, {"1", "B"}, {"9", "C"}});
  CHECK(t.zone_count() == 2);
}

TEST_CASE("random edge lists keep adjacency symmetric and degrees consistent") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.Below(12));
    std::vector<EdgeRecord> recs;
    const int m = static_cast<int>(rng.Below(40));
    std::set<std::pair<std::string, std::string>> pairs;
    for (int i = 0; i < m; ++i) {
      std::string a = std::to_string(rng.Below(n));
      std::string b = std::to_string(rng.Below(n));
      recs.push_back({a, b, rng.Uniform(0.1, 5.0), 0});
      if (a != b) pairs.insert(std::minmax(a, b));
    }
    if (recs.empty()) continue;
    const Graph g = BuildGraph(recs).graph;
    std::size_t degree_sum = 0;
    for (NodeId v = 0; v < g.node_count(); ++v) {
      degree_sum += g.degree(v);
      for (const Neighbor& nb : g.neighbors(v)) {
        CHECK(g.edge_weight(nb.id, v) == nb.weight);
      }
    }
    CHECK(g.edge_count() == pairs.size());
    CHECK(degree_sum == 2 * g.edge_count());

    std::vector<std::string> zone_of;
    for (NodeId v = 0; v < g.node_count(); ++v) zone_of.push_back("z" + std::to_string(v % 3));
    TractAssignment t(zone_of);
    std::vector<int> seen(g.node_count(), 0);
    for (const std::string& z : t.zones()) {
      for (NodeId v : t.zone_nodes(z)) ++seen[v];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST_CASE("edge csv parsing") {
  SUBCASE("two rows") {
    auto rows = ParseEdgeLines({"src,dst,weight", "a,b,1.5", "b,c,2.0"}, "e.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].a == "a");
    CHECK(rows[1].weight == 2.0);
  }
  SUBCASE("bad weight names the line") {
    try {
      ParseEdgeLines({"src,dst,weight", "a,b,1", "a,b,abc"}, "e.csv");
      FAIL("expected a data error");
    } catch (const DataError& e) {
      CHECK(std::string(e.what()).find("e.csv:3") != std::string::npos);
    }
  }
  SUBCASE("empty data section") {
    CHECK(ParseEdgeLines({"src,dst,weight"}, "e.csv").empty());
    CHECK(BuildGraph(std::vector<EdgeRecord>{}).graph.node_count() == 0);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(ParseEdgeCsv("/nonexistent/edges.csv"), DataError);
  }
}

TEST_CASE("share rows") {
  const std::string h = "zone,drive,transit,walk";
  SUBCASE("exact row accepted unchanged") {
    auto t = ParseShareLines({h, "z,0.5,0.3,0.2"}, "s.csv");
    CHECK(t.renormalized_rows == 0);
    CHECK(t.shares(0, 0) == 0.5);
    CHECK(t.shares(0, 1) == 0.3);
    CHECK(t.shares(0, 2) == 0.2);
  }
  SUBCASE("slightly off row is renormalized") {
    auto t = ParseShareLines({h, "z,0.50,0.30,0.21"}, "s.csv");
    CHECK(t.renormalized_rows == 1);
    CHECK(t.shares(0, 0) == doctest::Approx(0.5 / 1.01).epsilon(1e-14));
    CHECK(t.shares(0, 0) + t.shares(0, 1) + t.shares(0, 2) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("far off row is rejected") {
    CHECK_THROWS_AS(ParseShareLines({h, "z,0.9,0.3,0.3"}, "s.csv"), DataError);
  }
  SUBCASE("columns reorder to the requested modes") {
    auto t = ParseShareLines({h, "z,0.5,0.3,0.2"}, "s.csv", {"walk", "drive", "transit"});
    CHECK(t.mode_names == std::vector<std::string>{"walk", "drive", "transit"});
    CHECK(t.shares(0, 0) == 0.2);
  }
}

TEST_CASE("feature table marks missing cells") {
  auto t = ParseFeatureLines({"zone,f1,f2", "a,1,", "b,2,3"}, "f.csv");
  REQUIRE(t.zone_ids.size() == 2);
  CHECK(t.is_missing(0, 1));
  CHECK_FALSE(t.is_missing(1, 1));
  CHECK(t.values(1, 1) == 3.0);
  CHECK_THROWS_AS(ParseFeatureLines({"zone,f1", "a,1", "a,2"}, "f.csv"), DataError);
}

TEST_CASE("csv writers round-trip") {
  testing::TempDir dir("ingest");
  Graph g = MakeGraph(3, {{0, 1, 1.25}, {1, 2, 0.1}});
  WriteEdgeCsv(g, dir.file("e.csv"));
  Graph back = BuildGraph(ParseEdgeCsv(dir.file("e.csv"))).graph;
  CHECK(back.edges() == g.edges());

  TractAssignment t({"A", "A", "B"});
  WriteZoneCsv(g, t, dir.file("z.csv"));
  ZoneMap zm = ParseZoneCsv(dir.file("z.csv"));
  CHECK(zm.zone_of.at("2") == "B");
  CHECK(zm.zone_order == std::vector<std::string>{"A", "B"});
}

TEST_CASE("key value parsing") {
  auto kv = ParseKeyValues({"# c", "", "a = 1", "b=two words"}, "x.cfg");
  REQUIRE(kv.size() == 2);
  CHECK(kv[1].key == "b");
  CHECK(kv[1].value == "two words");
  CHECK(kv[1].line == 4);
  CHECK_THROWS_AS(ParseKeyValues({"a"}, "x.cfg"), DataError);
  CHECK_THROWS_AS(ParseKeyValues({"a=1", "a=2"}, "x.cfg"), DataError);
}

TEST_CASE("number formatting round-trips") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double v = (rng.Uniform() - 0.5) * std::pow(10.0, rng.Uniform(-10, 10));
    CHECK(ParseDouble(FormatDouble(v)).value() == v);
    CHECK(ParseDouble(FormatShort(v)).value() == v);
  }
  CHECK_FALSE(ParseDouble("1.5x").has_value());
  CHECK_FALSE(ParseDouble("").has_value());
}

}  // namespace
}  // namespace dhm
