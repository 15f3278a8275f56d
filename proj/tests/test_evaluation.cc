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
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "dhm/embedding.h"
#include "dhm/error.h"
#include "dhm/evaluation.h"
#include "dhm/ingest.h"
#include "dhm/mnl.h"
#include "test_util.h"

namespace dhm {
namespace {

std::vector<std::string> ZoneNames(std::size_t n) {
  std::vector<std::string> z;
  for (std::size_t i = 0; i < n; ++i) z.push_back("z" + std::to_string(i));
  return z;
}

TEST_CASE("train/test split") {
  SplitSpec spec;
  auto s = SplitIndices(10, spec);
  CHECK(s.train.size() == 7);
  CHECK(s.test.size() == 3);
  auto again = SplitIndices(10, spec);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.test.begin(), s.test.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> want(10);
  std::iota(want.begin(), want.end(), 0);
  CHECK(all == want);
  CHECK(std::is_sorted(s.train.begin(), s.train.end()));

  spec.train_fraction = 0.99;
  CHECK(SplitIndices(3, spec).test.size() == 1);
  spec.train_fraction = 1.0;
  CHECK_THROWS_AS(spec.Validate(), UsageError);
  CHECK_THROWS_AS(SplitIndices(1, SplitSpec{}), UsageError);
}

TEST_CASE("coefficient of determination") {
  const std::vector<double> y{1, 2, 3};
  CHECK(RSquared(y, y) == 1.0);
  const std::vector<double> mean{2, 2, 2};
  CHECK(RSquared(y, mean) == 0.0);
  const std::vector<double> f{1, 2, 4};
  CHECK(RSquared(y, f) == doctest::Approx(0.5).epsilon(1e-15));
  const std::vector<double> flat{1, 1, 1};
  CHECK_THROWS_AS(RSquared(flat, y), NumericalError);
}

TEST_CASE("pearson correlation") {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> neg{-1, -2, -3};
  CHECK(Pearson(a, a).r == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(Pearson(a, neg).r == doctest::Approx(-1.0).epsilon(1e-15));
  const std::vector<double> b{2, 4, 7};
  CHECK(std::abs(Pearson(a, b).r - 0.9934) < 1e-3);
  SUBCASE("missing pairs are dropped") {
    const std::vector<double> x{1, 2, std::nan(""), 3};
    const std::vector<double> y{2, 4, 100, 7};
    auto r = Pearson(x, y);
    CHECK(r.pairs == 3);
    CHECK(r.r == doctest::Approx(Pearson(a, b).r).epsilon(1e-14));
  }
  SUBCASE("constant side is degenerate") {
    const std::vector<double> c{5, 5, 5};
    auto r = Pearson(a, c);
    CHECK(r.degenerate);
    CHECK(r.r == 0.0);
  }
}

TEST_CASE("correlation matrix is symmetric with a unit diagonal") {
  Rng rng(1);
  std::vector<std::vector<double>> cols(4, std::vector<double>(30));
  for (auto& c : cols) {
    for (double& x : c) x = rng.Normal();
  }
  cols[3] = cols[0];
  for (double& x : cols[3]) x = 2 * x + rng.Normal() * 0.1;
  auto m = BuildCorrelationMatrix({"a", "b", "c", "d"}, cols);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(std::abs(m.r(i, i) - 1.0) <= 1e-12);
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(m.r(i, j) - m.r(j, i)) <= 1e-12);
  }
  CHECK(m.at("a", "d") > 0.9);
  CHECK_THROWS_AS(m.at("a", "zz"), UsageError);
}

CorrelationMatrix Handmade() {
  // Variables: f_strong, f_weak, drive, walk.
  CorrelationMatrix m;
  m.names = {"f_strong", "f_weak", "drive", "walk"};
  m.r = Matrix(4, 4);
  m.r.data() = {1, 0, 0.5, -0.5,   //
                0, 1, 0.01, 0.3,   //
                0.5, 0.01, 1, -0.9,  //
                -0.5, 0.3, -0.9, 1};
  m.degenerate.assign(16, 0);
  return m;
}

TEST_CASE("feature selection") {
  const auto m = Handmade();
  CHECK(SelectFeatures(m, {"drive", "walk"}, 0.05) == std::vector<std::string>{"f_strong"});
  CHECK(SelectFeatures(m, {"drive", "walk"}, 0.0) ==
        std::vector<std::string>{"f_strong", "f_weak"});
  CHECK(SelectFeatures(m, {"walk"}, 0.05) ==
        std::vector<std::string>{"f_strong", "f_weak", "drive"});
  CHECK_THROWS_AS(SelectFeatures(m, {"bike"}, 0.05), UsageError);
}

TEST_CASE("correlating tables adds the readout column") {
  FeatureTable f;
  f.zone_ids = {"a", "b", "c", "d"};
  f.column_names = {"x"};
  f.values = Matrix(4, 1);
  f.values.data() = {1, 2, 3, 4};
  f.missing.assign(4, 0);
  ModeShareTable s;
  s.zone_ids = {"d", "c", "b", "a"};
  s.mode_names = {"m1", "m2"};
  s.shares = Matrix(4, 2);
  s.shares.data() = {0.9, 0.1, 0.7, 0.3, 0.4, 0.6, 0.2, 0.8};
  ZoneEmbedding z;
  z.zone_ids = {"a", "b", "c", "d"};
  z.matrix = Matrix(4, 1);
  z.embd_readout = {4, 3, 2, 1};
  auto m = CorrelateTables(f, s, &z);
  CHECK(m.names == std::vector<std::string>{"x", "m1", "m2", "embd_readout"});
  CHECK(m.at("x", "m1") > 0.95);
  CHECK(m.at("x", "embd_readout") == doctest::Approx(-1.0).epsilon(1e-14));
}

Matrix Blobs(Rng& rng, std::size_t per_blob, std::vector<std::size_t>& truth) {
  Matrix m(2 * per_blob, 3);
  for (std::size_t i = 0; i < 2 * per_blob; ++i) {
    const double center = i < per_blob ? -50.0 : 50.0;
    truth.push_back(i < per_blob ? 0 : 1);
    for (double& x : m.row(i)) x = center + rng.Normal();
  }
  return m;
}

TEST_CASE("k-means") {
  Rng rng(2);
  SUBCASE("separated blobs") {
    std::vector<std::size_t> truth;
    const Matrix m = Blobs(rng, 15, truth);
    auto r = KMeans(m, 2, 7);
    for (std::size_t i = 0; i < truth.size(); ++i) {
      CHECK((r.labels[i] == r.labels[0]) == (truth[i] == truth[0]));
    }
    CHECK(r.converged);
  }
  SUBCASE("one cluster per point") {
    Matrix m(6, 2);
    for (double& x : m.data()) x = rng.Normal();
    auto r = KMeans(m, 6, 3);
    CHECK(std::set<std::size_t>(r.labels.begin(), r.labels.end()).size() == 6);
    CHECK(r.wcss() == 0.0);
  }
  SUBCASE("single cluster") {
    Matrix m(5, 2);
    m.data() = {0, 0, 1, 0, 2, 0, 3, 3, 4, 2};
    auto r = KMeans(m, 1, 3);
    for (auto l : r.labels) CHECK(l == 0);
    CHECK(r.centroids(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(r.centroids(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("bad k") {
    CHECK_THROWS_AS(KMeans(Matrix(3, 1), 0, 1), UsageError);
    CHECK_THROWS_AS(KMeans(Matrix(3, 1), 4, 1), UsageError);
  }
}

TEST_CASE("quantile zones") {
  SUBCASE("rank rule") {
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 0.0);
    std::reverse(v.begin(), v.end());
    auto q = QuantileZones(v, ZoneNames(100), {0.5});
    CHECK(q[0].value == 49.0);
    CHECK(q[0].zone == "z50");
  }
  SUBCASE("single zone") {
    const std::vector<double> v{3.5};
    for (const auto& q : QuantileZones(v, {"only"})) CHECK(q.zone == "only");
  }
  SUBCASE("twenty zones at 0.95") {
    std::vector<double> v(20);
    std::iota(v.begin(), v.end(), 0.0);
    auto q = QuantileZones(v, ZoneNames(20), {0.95});
    CHECK(q[0].value == 18.0);
  }
  SUBCASE("ties keep input order") {
    const std::vector<double> v{1, 1, 1};
    auto q = QuantileZones(v, {"c", "a", "b"}, {0.0, 1.0});
    CHECK(q[0].zone == "c");
    CHECK(q[1].zone == "b");
  }
  SUBCASE("out of range quantile") {
    const std::vector<double> v{1};
    CHECK_THROWS_AS(QuantileZones(v, {"a"}, {1.5}), UsageError);
  }
}

struct Problem {
  FeatureTable features;
  ZoneEmbedding embedding;
  ModeShareTable shares;
};

// Shares are either a softmax of linear utilities in the features or
// independent noise.
Problem MakeProblem(std::uint64_t seed, std::size_t n, bool linear) {
  Rng rng(seed);
  Problem p;
  const auto zones = ZoneNames(n);
  p.features.zone_ids = zones;
  p.features.column_names = {"f1", "f2"};
  p.features.values = Matrix(n, 2);
  for (double& x : p.features.values.data()) x = rng.Normal();
  p.features.missing.assign(2 * n, 0);
  p.embedding.zone_ids = zones;
  p.embedding.matrix = Matrix(n, 3);
  for (double& x : p.embedding.matrix.data()) x = rng.Normal();
  p.embedding.embd_readout.assign(n, 0.0);
  p.shares.zone_ids = zones;
  p.shares.mode_names = {"m1", "m2", "m3"};
  Matrix beta(3, 3);
  beta.data() = {0.2, 1.5, -0.5, -0.1, -0.7, 1.2, 0, 0, 0};
  p.shares.shares = Matrix(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s;
    if (linear) {
      s = MnlPredict(beta, p.features.values.row(i));
    } else {
      std::vector<double> u{rng.Normal(), rng.Normal(), rng.Normal()};
      s = Softmax(u);
    }
    std::copy(s.begin(), s.end(), p.shares.shares.row(i).begin());
  }
  return p;
}

TEST_CASE("linear shares are fitted in-sample") {
  auto p = MakeProblem(3, 40, true);
  auto cells = Evaluate(PredictorKind::kMnl, InputMode::kBaseline, p.features, p.embedding,
                        p.shares, SplitSpec{}, DefaultGrid(PredictorKind::kMnl, 1));
  REQUIRE(cells.size() == 3);
  for (const auto& c : cells) {
    CHECK(c.isr2 >= 0.99);
    CHECK(c.predictor == "mnl");
    CHECK(c.input_mode == "baseline");
  }
}

TEST_CASE("noise shares do not generalize") {
  double total = 0.0;
  int count = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto p = MakeProblem(seed, 40, false);
    SplitSpec split;
    split.seed = seed;
    for (const auto& c : Evaluate(PredictorKind::kMnl, InputMode::kBaseline, p.features,
                                  p.embedding, p.shares, split,
                                  DefaultGrid(PredictorKind::kMnl, 1))) {
      total += c.osr2;
      ++count;
    }
  }
  CHECK(total / count < 0.2);
}

TEST_CASE("grid search keeps the best mean out-of-sample score") {
  auto p = MakeProblem(4, 30, true);
  auto grid = DefaultGrid(PredictorKind::kRandomForest, 3);
  CHECK(grid.size() == 6);
  CHECK(DefaultGrid(PredictorKind::kGradientBoost, 3).size() == 12);
  CHECK(DefaultGrid(PredictorKind::kMnl, 3).size() == 1);
  grid.resize(2);
  for (auto& g : grid) g.forest.n_trees = 10;
  auto best = Evaluate(PredictorKind::kRandomForest, InputMode::kConcat, p.features,
                       p.embedding, p.shares, SplitSpec{}, grid);
  double best_mean = 0.0;
  for (const auto& c : best) best_mean += c.osr2 / 3;
  for (const auto& g : grid) {
    double mean = 0.0;
    for (const auto& c : Evaluate(PredictorKind::kRandomForest, InputMode::kConcat, p.features,
                                  p.embedding, p.shares, SplitSpec{}, {g})) {
      mean += c.osr2 / 3;
    }
    CHECK(mean <= best_mean);
  }
  CHECK_THROWS_AS(Evaluate(PredictorKind::kMnl, InputMode::kConcat, p.features, p.embedding,
                           p.shares, SplitSpec{}, grid),
                  UsageError);
}

TEST_CASE("csv writers") {
  EvaluationReport r;
  r.cells.push_back({"mnl", "ger", "walk", 0.5, 0.25, "l2=0.0001"});
  CHECK(ReportCsv(r) ==
        "predictor,input_mode,travel_mode,isr2,osr2,params\nmnl,ger,walk,0.5,0.25,l2=0.0001\n");
  CHECK(ClusterCsv({"a", "b"}, {1, 0}) == "zone,cluster\na,1\nb,0\n");
  const std::vector<QuantileZone> q{{0.5, "a", 2.0}};
  CHECK(QuantileCsv(q).rfind("quantile,zone,embd_readout\n", 0) == 0);
}

}  // namespace
}  // namespace dhm
