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


// Randomized checks of structural invariants.

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "dhm/alias.h"
#include "dhm/embedding.h"
#include "dhm/evaluation.h"
#include "dhm/graph.h"
#include "dhm/topology.h"
#include "dhm/walker.h"
#include "test_util.h"

namespace dhm {
namespace {

using testing::RandomStreetGraph;

// Random connected-ish graph with at most `max_n` nodes.
Graph RandomSmallGraph(Rng& rng, int max_n) {
  const int n = 2 + static_cast<int>(rng.Below(static_cast<std::uint64_t>(max_n - 1)));
  std::vector<testing::WEdge> e;
  for (int v = 1; v < n; ++v) {
    e.push_back({static_cast<int>(rng.Below(static_cast<std::uint64_t>(v))), v,
                 rng.Uniform(0.5, 3.0)});
  }
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      const bool present = std::any_of(e.begin(), e.end(), [&](const testing::WEdge& x) {
        return x.a == a && x.b == b;
      });
      if (!present && rng.Bernoulli(0.3)) e.push_back({a, b, rng.Uniform(0.5, 3.0)});
    }
  }
  return testing::MakeGraph(n, e);
}

TEST_CASE("simplification is idempotent, shrinking and length-conserving") {
  Rng rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const Graph g = RandomStreetGraph(rng);
    const auto once = SimplifyTopology(g);
    const auto twice = SimplifyTopology(once.graph);
    CHECK(twice.graph.labels() == once.graph.labels());
    CHECK(twice.graph.edges() == once.graph.edges());
    CHECK(once.graph.node_count() <= g.node_count());
    CHECK(once.graph.edge_count() <= g.edge_count());
    const auto& s = once.summary;
    CHECK(s.length_before == g.total_length());
    CHECK(s.length_after == once.graph.total_length());
    CHECK(s.length_after == s.length_before - s.self_loop_length - s.merged_length);
    for (NodeId v = 0; v < once.graph.node_count(); ++v) CHECK(once.graph.degree(v) != 2);
  }
}

TEST_CASE("metrics do not depend on node numbering") {
  Rng rng(102);
  for (int trial = 0; trial < 30; ++trial) {
    const Graph g = RandomStreetGraph(rng);
    std::vector<EdgeRecord> recs;
    for (const Edge& e : g.edges()) recs.push_back({g.label(e.a), g.label(e.b), e.weight, 0});
    rng.Shuffle(recs.begin(), recs.end());
    const Graph h = BuildGraph(recs).graph;
    if (h.node_count() != g.node_count()) continue;  // isolated nodes vanish

    const auto zone = [](const std::string& label) { return "z" + std::to_string(std::stoi(label) % 4); };
    std::vector<std::string> zg, zh;
    for (NodeId v = 0; v < g.node_count(); ++v) zg.push_back(zone(g.label(v)));
    for (NodeId v = 0; v < h.node_count(); ++v) zh.push_back(zone(h.label(v)));
    const std::vector<std::string> order{"z0", "z1", "z2", "z3"};
    TractAssignment ag(zg, order), ah(zh, order);
    if (ag.zone_count() != 4 || ah.zone_count() != 4) continue;
    const std::vector<double> areas{1.0, 2.0, 0.5, 4.0};
    const auto mg = ComputeNetworkMetrics(g, ag, areas);
    const auto mh = ComputeNetworkMetrics(h, ah, areas);
    for (std::size_t z = 0; z < 4; ++z) {
      CHECK(mg[z].zone == mh[z].zone);
      CHECK(mg[z].road_density == mh[z].road_density);
      CHECK(mg[z].num_node_per_area == mh[z].num_node_per_area);
      CHECK(mg[z].num_road_per_area == mh[z].num_road_per_area);
      CHECK(mg[z].sum_deg == mh[z].sum_deg);
      CHECK(mg[z].sub_sum_cent == mh[z].sub_sum_cent);
    }
  }
}

TEST_CASE("transition distributions are normalized") {
  Rng rng(103);
  for (int trial = 0; trial < 100; ++trial) {
    const Graph g = RandomSmallGraph(rng, 8);
    const double p = std::exp(rng.Uniform(-2, 2));
    const double q = std::exp(rng.Uniform(-2, 2));
    for (NodeId t = 0; t < g.node_count(); ++t) {
      for (const Neighbor& nb : g.neighbors(t)) {
        for (auto tr : {WeightTransform::kInverse, WeightTransform::kIdentity}) {
          const auto probs = TransitionProbs(g, t, nb.id, p, q, tr);
          double s = 0.0;
          for (double x : probs) {
            CHECK(x >= 0.0);
            s += x;
          }
          CHECK(std::abs(s - 1.0) <= 1e-12);
          CHECK(TransitionProbs(g, t, nb.id, 1.0, 1.0, tr) == FirstStepProbs(g, nb.id, tr));
        }
      }
    }
  }
}

TEST_CASE("alias tables reproduce their inputs") {
  Rng rng(104);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.Below(16);
    std::vector<double> w(n);
    for (double& x : w) x = rng.Bernoulli(0.2) ? 0.0 : rng.Uniform(0.0, 10.0);
    if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = 1.0;
    const double z = std::accumulate(w.begin(), w.end(), 0.0);
    const auto d = AliasTable(w).Distribution();
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(d[i] - w[i] / z) <= 1e-12);
  }
}

TEST_CASE("bigram frequencies match the exact chain on random small graphs") {
  Rng rng(105);
  for (int trial = 0; trial < 5; ++trial) {
    const Graph g = RandomSmallGraph(rng, 6);
    WalkConfig cfg;
    cfg.p = std::exp(rng.Uniform(-1.5, 1.5));
    cfg.q = std::exp(rng.Uniform(-1.5, 1.5));
    cfg.walk_length = 6;
    cfg.walks_per_node = 3000;
    cfg.seed = trial;
    const auto corpus = GenerateWalks(g, cfg);
    std::map<std::pair<int, int>, double> seen;
    double total = 0.0;
    for (const auto& w : corpus.walks) {
      for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        seen[{static_cast<int>(w[i]), static_cast<int>(w[i + 1])}] += 1.0;
        total += 1.0;
      }
    }
    for (const auto& [k, v] : testing::ExactBigrams(g, cfg.walk_length, cfg.p, cfg.q)) {
      CHECK(std::abs(seen[k] / total - v) < 0.01);
    }
  }
}

TEST_CASE("readout is linear") {
  Rng rng(106);
  for (int trial = 0; trial < 50; ++trial) {
    // Zone sizes are powers of two and entries small integers, so every
    // intermediate value is exact.
    std::vector<std::string> zone_of;
    const std::vector<std::size_t> sizes{1, 2, 4, 8};
    for (std::size_t z = 0; z < sizes.size(); ++z) {
      for (std::size_t i = 0; i < sizes[z]; ++i) zone_of.push_back("z" + std::to_string(z));
    }
    rng.Shuffle(zone_of.begin(), zone_of.end());
    const TractAssignment t(zone_of);
    Matrix r1(zone_of.size(), 5), r2(zone_of.size(), 5), mix(zone_of.size(), 5);
    const double a = static_cast<double>(rng.Below(7)) - 3.0;
    const double b = static_cast<double>(rng.Below(7)) - 3.0;
    for (std::size_t i = 0; i < r1.data().size(); ++i) {
      r1.data()[i] = static_cast<double>(rng.Below(21)) - 10.0;
      r2.data()[i] = static_cast<double>(rng.Below(21)) - 10.0;
      mix.data()[i] = a * r1.data()[i] + b * r2.data()[i];
    }
    const auto z1 = Readout(r1, t), z2 = Readout(r2, t), zm = Readout(mix, t);
    for (std::size_t i = 0; i < zm.matrix.data().size(); ++i) {
      CHECK(zm.matrix.data()[i] == a * z1.matrix.data()[i] + b * z2.matrix.data()[i]);
    }
  }
}

TEST_CASE("fit metrics are invariant under positive affine maps") {
  Rng rng(107);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 3 + rng.Below(30);
    std::vector<double> y(n), f(n), ya(n), fa(n), fb(n);
    const double scale = std::exp(rng.Uniform(-3, 3));
    const double shift = rng.Uniform(-10, 10);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = rng.Normal();
      f[i] = y[i] + rng.Normal() * 0.5;
      ya[i] = scale * y[i] + shift;
      fa[i] = scale * f[i] + shift;
    }
    CHECK(RSquared(y, y) == 1.0);
    CHECK(RSquared(ya, fa) == doctest::Approx(RSquared(y, f)).epsilon(1e-9));
    const double s2 = std::exp(rng.Uniform(-3, 3));
    for (std::size_t i = 0; i < n; ++i) fb[i] = s2 * f[i] - shift;
    CHECK(Pearson(ya, fb).r == doctest::Approx(Pearson(y, f).r).epsilon(1e-9));
  }
}

TEST_CASE("k-means never increases the within-cluster sum of squares") {
  Rng rng(108);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 10 + rng.Below(40);
    Matrix m(n, 3);
    for (double& x : m.data()) x = rng.Normal() * (1 + rng.Below(3));
    const std::size_t k = 1 + rng.Below(std::min<std::size_t>(n, 8));
    const auto r = KMeans(m, k, trial);
    for (std::size_t i = 1; i < r.wcss_history.size(); ++i) {
      CHECK(r.wcss_history[i] <= r.wcss_history[i - 1] * (1 + 1e-12));
    }
    CHECK(r.labels.size() == n);
    for (auto l : r.labels) CHECK(l < k);
  }
}

TEST_CASE("feature selection shrinks as the threshold rises") {
  Rng rng(109);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<double>> cols(8, std::vector<double>(25));
    for (auto& c : cols) {
      for (double& x : c) x = rng.Normal();
    }
    for (std::size_t i = 0; i < 25; ++i) cols[6][i] += cols[0][i] + 0.5 * cols[1][i];
    std::vector<std::string> names{"a", "b", "c", "d", "e", "f", "m1", "m2"};
    const auto m = BuildCorrelationMatrix(names, cols);
    const double t2 = rng.Uniform(0, 0.5);
    const double t1 = t2 + rng.Uniform(0, 0.5);
    const auto loose = SelectFeatures(m, {"m1", "m2"}, t2);
    const auto strict = SelectFeatures(m, {"m1", "m2"}, t1);
    const std::set<std::string> loose_set(loose.begin(), loose.end());
    for (const auto& s : strict) CHECK(loose_set.count(s) == 1);
  }
}

}  // namespace
}  // namespace dhm
