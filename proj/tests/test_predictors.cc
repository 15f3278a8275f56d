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
#include <string>
#include <vector>

#include "doctest.h"
#include "dhm/embedding.h"
#include "dhm/error.h"
#include "dhm/ingest.h"
#include "dhm/mix.h"
#include "dhm/mnl.h"
#include "dhm/predictor.h"
#include "dhm/trees.h"
#include "test_util.h"

namespace dhm {
namespace {

Matrix RandomMatrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  Matrix m(r, c);
  for (double& x : m.data()) x = rng.Normal() * scale;
  return m;
}

// Rows on the simplex drawn from a softmax of random utilities.
Matrix RandomShares(Rng& rng, std::size_t r, std::size_t modes) {
  Matrix s(r, modes);
  for (std::size_t i = 0; i < r; ++i) {
    double z = 0.0;
    for (std::size_t k = 0; k < modes; ++k) z += s(i, k) = std::exp(rng.Normal());
    for (std::size_t k = 0; k < modes; ++k) s(i, k) /= z;
  }
  return s;
}

std::vector<std::size_t> AllRows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), 0);
  return r;
}

FeatureTable Features(const std::vector<std::string>& zones, std::size_t k, Rng& rng) {
  FeatureTable t;
  t.zone_ids = zones;
  for (std::size_t c = 0; c < k; ++c) t.column_names.push_back("f" + std::to_string(c + 1));
  t.values = RandomMatrix(rng, zones.size(), k);
  t.missing.assign(zones.size() * k, 0);
  return t;
}

ZoneEmbedding Embedding(const std::vector<std::string>& zones, std::size_t dim, Rng& rng) {
  ZoneEmbedding z;
  z.zone_ids = zones;
  z.matrix = RandomMatrix(rng, zones.size(), dim);
  z.embd_readout.assign(zones.size(), 0.0);
  return z;
}

TEST_CASE("input mixing") {
  Rng rng(1);
  const std::vector<std::string> zones{"a", "b", "c"};
  const auto f = Features(zones, 3, rng);
  const auto z = Embedding(zones, 4, rng);
  SUBCASE("concat stacks both blocks") {
    auto m = Mix(f, z, InputMode::kConcat);
    CHECK(m.design.cols() == 7);
    CHECK(m.column_names.size() == 7);
  }
  SUBCASE("ger ignores the features") {
    auto m = Mix(f, z, InputMode::kGer);
    CHECK(m.design == z.matrix);
  }
  SUBCASE("baseline uses only the features") {
    auto m = Mix(f, z, InputMode::kBaseline);
    CHECK(m.design == f.values);
  }
  SUBCASE("mismatched zones") {
    const auto other = Embedding({"a", "b", "d"}, 4, rng);
    CHECK_THROWS_AS(Mix(f, other, InputMode::kConcat), DataError);
  }
  SUBCASE("mode names") {
    CHECK(ParseInputMode("ger") == InputMode::kGer);
    CHECK(ToString(InputMode::kConcat) == "concat");
    CHECK_THROWS_AS(ParseInputMode("both"), UsageError);
  }
}

TEST_CASE("standardizer uses training rows only") {
  Matrix d(4, 2);
  d.data() = {1, 5, 3, 5, 100, 5, std::nan(""), 5};
  const std::vector<std::size_t> train{0, 1, 3};
  auto s = Standardizer::Fit(d, train, {"x", "flat"});
  REQUIRE(s.kept == std::vector<std::size_t>{0});
  CHECK(s.dropped == std::vector<std::string>{"flat"});
  CHECK(s.mean[0] == 2.0);
  CHECK(s.imputed == 1);
  auto a = s.Apply(d, train);
  CHECK(a(0, 0) == doctest::Approx(-a(1, 0)));
  CHECK(a(2, 0) == 0.0);  // missing cell imputed to the training mean
}

TEST_CASE("softmax") {
  const std::vector<double> equal{0.3, 0.3, 0.3, 0.3};
  for (double p : Softmax(equal)) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
  const std::vector<double> two{1.0, 0.0};
  auto p = Softmax(two);
  CHECK(p[0] == doctest::Approx(0.73106).epsilon(1e-5));
  CHECK(p[1] == doctest::Approx(0.26894).epsilon(1e-5));
  const std::vector<double> shifted{1001.0, 1000.0};
  auto q = Softmax(shifted);
  CHECK(q[0] == doctest::Approx(p[0]).epsilon(1e-14));
  CHECK(q[1] == doctest::Approx(p[1]).epsilon(1e-14));
}

TEST_CASE("mnl gradient matches finite differences") {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 5 + rng.Below(10), d = 1 + rng.Below(4), m = 2 + rng.Below(3);
    const Matrix z = RandomMatrix(rng, n, d);
    const Matrix y = RandomShares(rng, n, m);
    Matrix beta = RandomMatrix(rng, m, d + 1, 0.5);
    const double l2 = rng.Uniform(0.0, 0.1);
    const auto loss = [&](const std::vector<double>& b) {
      Matrix bm(m, d + 1);
      bm.data() = b;
      return MnlLoss(bm, z, y, l2);
    };
    const auto numeric = testing::NumericGradient(loss, beta.data());
    CHECK(testing::MaxRelativeError(MnlGradient(beta, z, y, l2).data(), numeric) < 1e-4);
  }
}

TEST_CASE("intercept-only model reproduces mean shares") {
  Rng rng(3);
  const Matrix y = RandomShares(rng, 30, 3);
  auto fit = MnlFit(Matrix(30, 0), y);
  CHECK(fit.converged);
  const std::vector<double> none;
  const auto p = MnlPredict(fit.model.beta, none);
  for (std::size_t k = 0; k < 3; ++k) {
    const auto col = y.column(k);
    const double mean = std::accumulate(col.begin(), col.end(), 0.0) / 30.0;
    CHECK(std::abs(p[k] - mean) < 1e-6);
  }
}

TEST_CASE("uniform shares give zero coefficients") {
  Rng rng(4);
  const Matrix z = RandomMatrix(rng, 20, 3);
  for (double l2 : {1e-4, 1e-2, 1.0}) {
    MnlFitOptions opts;
    opts.l2_lambda = l2;
    auto fit = MnlFit(z, Matrix(20, 4, 0.25), opts);
    for (double b : fit.model.beta.data()) CHECK(std::abs(b) < 1e-6);
  }
}

TEST_CASE("mnl fit recovers linear-in-features shares") {
  Rng rng(5);
  const Matrix z = RandomMatrix(rng, 60, 2);
  Matrix truth(3, 3);
  truth.data() = {0.5, 1.0, -1.0, -0.2, 0.3, 0.8, 0.0, 0.0, 0.0};
  const Matrix y = MnlPredictAll(truth, z);
  MnlFitOptions opts;
  opts.l2_lambda = 0.0;
  auto fit = MnlFit(z, y, opts);
  const Matrix p = MnlPredictAll(fit.model.beta, z);
  for (std::size_t i = 0; i < p.data().size(); ++i) {
    CHECK(p.data()[i] == doctest::Approx(y.data()[i]).epsilon(1e-5));
  }
  CHECK(fit.model.reference_mode == 2);
  for (double b : fit.model.beta.row(2)) CHECK(b == 0.0);
}

TEST_CASE("mnl loss never increases across accepted steps") {
  Rng rng(6);
  auto fit = MnlFit(RandomMatrix(rng, 40, 5), RandomShares(rng, 40, 3));
  REQUIRE(fit.loss_history.size() > 2);
  for (std::size_t i = 1; i < fit.loss_history.size(); ++i) {
    CHECK(fit.loss_history[i] <= fit.loss_history[i - 1]);
  }
}

TEST_CASE("mnl predictions stay on the simplex") {
  Rng rng(7);
  Matrix beta = RandomMatrix(rng, 4, 3, 20.0);
  const Matrix z = RandomMatrix(rng, 50, 2, 10.0);
  const Matrix p = MnlPredictAll(beta, z);
  for (std::size_t r = 0; r < p.rows(); ++r) {
    double s = 0.0;
    for (double v : p.row(r)) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      s += v;
    }
    CHECK(std::abs(s - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(MnlFit(Matrix(3, 1), Matrix(3, 1, 1.0)), UsageError);
}

TEST_CASE("regression trees") {
  SUBCASE("depth-one tree separates two classes") {
    Matrix x(6, 2);
    x.data() = {-1, 0.3, -1, -2, -1, 5, 1, 0.1, 1, -3, 1, 2};
    const std::vector<double> y{0, 0, 0, 1, 1, 1};
    TreeParams params;
    params.max_depth = 1;
    auto t = FitTree(x, y, AllRows(6), params, nullptr);
    REQUIRE(t.nodes().size() == 3);
    CHECK(t.nodes()[0].feature == 0);
    CHECK(t.nodes()[0].threshold > -1.0);
    CHECK(t.nodes()[0].threshold < 1.0);
    for (std::size_t i = 0; i < 6; ++i) CHECK(t.Predict(x.row(i)) == y[i]);
  }
  SUBCASE("depth zero predicts the mean") {
    Matrix x(4, 1);
    x.data() = {1, 2, 3, 4};
    const std::vector<double> y{1, 2, 3, 10};
    TreeParams params;
    params.max_depth = 0;
    auto t = FitTree(x, y, AllRows(4), params, nullptr);
    CHECK(t.depth() == 0);
    CHECK(t.Predict(x.row(0)) == 4.0);
  }
  SUBCASE("min leaf size") {
    Matrix x(4, 1);
    x.data() = {1, 2, 3, 4};
    const std::vector<double> y{0, 0, 0, 1};
    TreeParams params;
    params.min_leaf = 2;
    auto t = FitTree(x, y, AllRows(4), params, nullptr);
    CHECK(t.Predict(x.row(3)) == 0.5);
  }
}

TEST_CASE("a depth-zero single-tree forest predicts a bootstrap mean") {
  Rng rng(8);
  Matrix x = RandomMatrix(rng, 12, 2);
  Matrix y(12, 1);
  for (std::size_t i = 0; i < 12; ++i) y(i, 0) = static_cast<double>(rng.Below(2));
  ForestParams fp;
  fp.n_trees = 1;
  fp.max_depth = 0;
  auto model = ForestFit(x, y, fp);
  const Matrix p = EnsemblePredict(model, x);
  for (std::size_t i = 1; i < 12; ++i) CHECK(p(i, 0) == p(0, 0));
  // The mean of 12 draws of 0/1 targets is a multiple of 1/12.
  const double hits = p(0, 0) * 12.0;
  CHECK(std::abs(hits - std::round(hits)) < 1e-9);
}

TEST_CASE("forest predictions stay within the training range") {
  Rng rng(9);
  const Matrix x = RandomMatrix(rng, 30, 3);
  const Matrix y = RandomMatrix(rng, 30, 2);
  ForestParams fp;
  fp.n_trees = 20;
  auto model = ForestFit(x, y, fp);
  const Matrix p = EnsemblePredict(model, RandomMatrix(rng, 50, 3, 5.0));
  for (std::size_t k = 0; k < 2; ++k) {
    const auto col = y.column(k);
    const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
    for (std::size_t i = 0; i < p.rows(); ++i) {
      CHECK(p(i, k) >= *lo);
      CHECK(p(i, k) <= *hi);
    }
  }
  CHECK(ForestFit(x, y, fp) == model);
  fp.seed = 2;
  CHECK_FALSE(ForestFit(x, y, fp) == model);
}

TEST_CASE("gradient boosting") {
  Rng rng(10);
  const Matrix x = RandomMatrix(rng, 25, 2);
  const Matrix y = RandomMatrix(rng, 25, 2);
  SUBCASE("one full-shrinkage deep round interpolates") {
    BoostParams bp;
    bp.n_rounds = 1;
    bp.shrinkage = 1.0;
    bp.max_depth = -1;
    const Matrix p = EnsemblePredict(BoostFit(x, y, bp), x);
    for (std::size_t i = 0; i < p.data().size(); ++i) {
      CHECK(p.data()[i] == doctest::Approx(y.data()[i]).epsilon(1e-12));
    }
  }
  SUBCASE("one depth-zero round predicts the target mean") {
    BoostParams bp;
    bp.n_rounds = 1;
    bp.shrinkage = 1.0;
    bp.max_depth = 0;
    const Matrix p = EnsemblePredict(BoostFit(x, y, bp), x);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto col = y.column(k);
      const double mean = std::accumulate(col.begin(), col.end(), 0.0) / 25.0;
      CHECK(p(7, k) == doctest::Approx(mean).epsilon(1e-12));
    }
  }
  SUBCASE("training loss is non-increasing") {
    BoostParams bp;
    bp.n_rounds = 50;
    bp.max_depth = 2;
    std::vector<std::vector<double>> history;
    BoostFit(x, y, bp, &history);
    REQUIRE(history.size() == 2);
    for (const auto& h : history) {
      CHECK(h.size() == 51);
      for (std::size_t m = 1; m < h.size(); ++m) CHECK(h[m] <= h[m - 1]);
    }
  }
  SUBCASE("invalid parameters") {
    BoostParams bp;
    bp.n_rounds = 0;
    CHECK_THROWS_AS(BoostFit(x, y, bp), UsageError);
    bp = {};
    bp.shrinkage = 0.0;
    CHECK_THROWS_AS(BoostFit(x, y, bp), UsageError);
  }
}

MixedInput RandomInput(Rng& rng, std::size_t n, std::size_t d) {
  MixedInput in;
  in.mode = InputMode::kBaseline;
  for (std::size_t i = 0; i < n; ++i) in.zone_ids.push_back("z" + std::to_string(i));
  for (std::size_t c = 0; c < d; ++c) in.column_names.push_back("f" + std::to_string(c));
  in.design = RandomMatrix(rng, n, d, 3.0);
  return in;
}

TEST_CASE("constant targets are reproduced on the training rows") {
  Rng rng(11);
  const auto in = RandomInput(rng, 20, 3);
  Matrix shares(20, 3);
  for (std::size_t i = 0; i < 20; ++i) {
    shares(i, 0) = 0.6;
    shares(i, 1) = 0.3;
    shares(i, 2) = 0.1;
  }
  const std::vector<std::size_t> train{0, 2, 4, 6, 8, 10, 12, 14};
  for (auto kind : {PredictorKind::kMnl, PredictorKind::kRandomForest,
                    PredictorKind::kGradientBoost}) {
    PredictorParams params;
    params.kind = kind;
    params.forest.n_trees = 10;
    params.boost.n_rounds = 10;
    auto model = FitPredictor(in, shares, {"a", "b", "c"}, train, params);
    const Matrix p = model.Predict(SelectRows(in.design, train));
    for (std::size_t i = 0; i < p.rows(); ++i) {
      CHECK(p(i, 0) == doctest::Approx(0.6).epsilon(1e-6));
      CHECK(p(i, 2) == doctest::Approx(0.1).epsilon(1e-6));
    }
  }
}

TEST_CASE("models serialize and reload") {
  Rng rng(12);
  const auto in = RandomInput(rng, 15, 2);
  const Matrix shares = RandomShares(rng, 15, 3);
  testing::TempDir dir("model");
  for (auto kind : {PredictorKind::kMnl, PredictorKind::kRandomForest,
                    PredictorKind::kGradientBoost}) {
    PredictorParams params;
    params.kind = kind;
    params.forest.n_trees = 5;
    params.boost.n_rounds = 5;
    auto model = FitPredictor(in, shares, {"a", "b", "c"}, AllRows(15), params);
    const std::string text = SerializeModel(model);
    auto back = DeserializeModel(text);
    CHECK(SerializeModel(back) == text);
    CHECK(back.Predict(in.design) == model.Predict(in.design));
    SaveModel(model, dir.file("m.txt"));
    CHECK(LoadModel(dir.file("m.txt")).Predict(in.design) == model.Predict(in.design));
  }
  CHECK_THROWS_AS(DeserializeModel("garbage"), DataError);
}

TEST_CASE("predictor names") {
  CHECK(ParsePredictorKind("random_forest") == PredictorKind::kRandomForest);
  CHECK(ToString(PredictorKind::kGradientBoost) == "gradient_boost");
  CHECK_THROWS_AS(ParsePredictorKind("svm"), UsageError);
}

}  // namespace
}  // namespace dhm
