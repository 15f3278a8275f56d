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

#include "dhm/trees.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "dhm/error.h"

namespace dhm {

double RegressionTree::Predict(std::span<const double> x) const {
  int i = 0;
  while (nodes_[static_cast<std::size_t>(i)].feature >= 0) {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<std::size_t>(i)].value;
}

int RegressionTree::depth() const {
  std::function<int(int)> rec = [&](int i) -> int {
    const Node& n = nodes_[static_cast<std::size_t>(i)];
    if (n.feature < 0) return 0;
    return 1 + std::max(rec(n.left), rec(n.right));
  };
  return nodes_.empty() ? 0 : rec(0);
}

std::string ToString(EnsembleKind kind) {
  return kind == EnsembleKind::kRandomForest ? "random_forest" : "gradient_boost";
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const double> y,
              const TreeParams& params, Rng* rng)
      : x_(x), y_(y), params_(params), rng_(rng) {}

  RegressionTree Build(std::vector<std::size_t> rows) {
    tree_.nodes().clear();
    Grow(std::move(rows), 0);
    return std::move(tree_);
  }

 private:
  int Grow(std::vector<std::size_t> rows, int depth) {
    const int id = static_cast<int>(tree_.nodes().size());
    tree_.nodes().emplace_back();

    double sum = 0.0;
    for (std::size_t r : rows) sum += y_[r];
    const double mean = sum / static_cast<double>(rows.size());
    double sse = 0.0;
    for (std::size_t r : rows) sse += (y_[r] - mean) * (y_[r] - mean);
    tree_.nodes()[static_cast<std::size_t>(id)].value = mean;

    const bool depth_ok = params_.max_depth < 0 || depth < params_.max_depth;
    const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_leaf));
    if (!depth_ok || rows.size() < 2 * min_leaf || !(sse > 0.0)) return id;

    const Split best = BestSplit(rows, sum, sse, min_leaf);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t r : rows) {
      (x_(r, static_cast<std::size_t>(best.feature)) <= best.threshold ? left : right)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = Grow(std::move(left), depth + 1);
    const int rgt = Grow(std::move(right), depth + 1);
    auto& node = tree_.nodes()[static_cast<std::size_t>(id)];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = l;
    node.right = rgt;
    return id;
  }

  std::vector<std::size_t> Candidates() {
    const std::size_t d = x_.cols();
    std::vector<std::size_t> feats(d);
    std::iota(feats.begin(), feats.end(), 0);
    const auto k = static_cast<std::size_t>(std::max(0, params_.features_per_split));
    if (k == 0 || k >= d || rng_ == nullptr) return feats;
    // Partial Fisher-Yates for the first k.
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + rng_->Below(d - i);
      std::swap(feats[i], feats[j]);
    }
    feats.resize(k);
    std::sort(feats.begin(), feats.end());
    return feats;
  }

  Split BestSplit(const std::vector<std::size_t>& rows, double sum, double sse,
                  std::size_t min_leaf) {
    Split best;
    const double n = static_cast<double>(rows.size());
    const double parent_term = sum * sum / n;
    const double min_gain = 1e-12 * sse;
    std::vector<std::size_t> order(rows);
    for (std::size_t f : Candidates()) {
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double xa = x_(a, f), xb = x_(b, f);
        return xa < xb || (xa == xb && a < b);
      });
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        left_sum += y_[order[i]];
        const std::size_t nl = i + 1;
        const std::size_t nr = order.size() - nl;
        const double lo = x_(order[i], f);
        const double hi = x_(order[i + 1], f);
        if (!(lo < hi) || nl < min_leaf || nr < min_leaf) continue;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(nl) +
                            right_sum * right_sum / static_cast<double>(nr) -
                            parent_term;
        if (gain > best.gain && gain > min_gain) {
          double thr = lo + (hi - lo) * 0.5;
          if (!(thr < hi)) thr = lo;
          best = {static_cast<int>(f), thr, gain};
        }
      }
    }
    return best;
  }

  const Matrix& x_;
  std::span<const double> y_;
  TreeParams params_;
  Rng* rng_;
  RegressionTree tree_;
};

void CheckShapes(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows()) throw UsageError("tree input/target row mismatch");
  if (x.rows() == 0) throw UsageError("no training rows");
}

}  // namespace

RegressionTree FitTree(const Matrix& x, std::span<const double> y,
                       std::span<const std::size_t> rows,
                       const TreeParams& params, Rng* rng) {
  if (rows.empty()) throw UsageError("cannot fit a tree on zero rows");
  TreeBuilder builder(x, y, params, rng);
  return builder.Build(std::vector<std::size_t>(rows.begin(), rows.end()));
}

TreeEnsembleModel ForestFit(const Matrix& x, const Matrix& y,
                            const ForestParams& params) {
  CheckShapes(x, y);
  if (params.n_trees < 1) throw UsageError("n_trees must be >= 1");
  TreeEnsembleModel model;
  model.kind = EnsembleKind::kRandomForest;
  model.forest = params;
  const std::size_t modes = y.cols();
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_leaf = params.min_leaf;
  tp.features_per_split =
      params.features_per_split > 0
          ? params.features_per_split
          : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));

  model.base.assign(modes, 0.0);
  model.trees.resize(modes);
  for (std::size_t m = 0; m < modes; ++m) {
    const std::vector<double> target = y.column(m);
    for (int t = 0; t < params.n_trees; ++t) {
      Rng rng(DeriveSeed(params.seed, {m, static_cast<std::uint64_t>(t)}));
      std::vector<std::size_t> sample(n);
      for (auto& r : sample) r = rng.Below(n);
      model.trees[m].push_back(FitTree(x, target, sample, tp, &rng));
    }
  }
  return model;
}

TreeEnsembleModel BoostFit(const Matrix& x, const Matrix& y,
                           const BoostParams& params,
                           std::vector<std::vector<double>>* loss_history) {
  CheckShapes(x, y);
  if (params.n_rounds < 1) throw UsageError("n_rounds must be >= 1");
  if (!(params.shrinkage > 0.0 && params.shrinkage <= 1.0)) {
    throw UsageError("shrinkage must be in (0, 1]");
  }
  TreeEnsembleModel model;
  model.kind = EnsembleKind::kGradientBoost;
  model.boost = params;
  const std::size_t modes = y.cols();
  const std::size_t n = x.rows();
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_leaf = params.min_leaf;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  model.base.assign(modes, 0.0);
  model.trees.resize(modes);
  if (loss_history) loss_history->assign(modes, {});
  for (std::size_t m = 0; m < modes; ++m) {
    const std::vector<double> target = y.column(m);
    double mean = 0.0;
    for (double v : target) mean += v;
    mean /= static_cast<double>(n);
    model.base[m] = mean;

    std::vector<double> fitted(n, mean), residual(n);
    const auto record = [&] {
      if (!loss_history) return;
      double sse = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        sse += (target[i] - fitted[i]) * (target[i] - fitted[i]);
      }
      (*loss_history)[m].push_back(sse / static_cast<double>(n));
    };
    record();
    for (int round = 0; round < params.n_rounds; ++round) {
      for (std::size_t i = 0; i < n; ++i) residual[i] = target[i] - fitted[i];
      RegressionTree tree = FitTree(x, residual, all, tp, nullptr);
      for (std::size_t i = 0; i < n; ++i) {
        fitted[i] += params.shrinkage * tree.Predict(x.row(i));
      }
      model.trees[m].push_back(std::move(tree));
      record();
    }
  }
  return model;
}

Matrix EnsemblePredict(const TreeEnsembleModel& model, const Matrix& x) {
  const std::size_t modes = model.trees.size();
  Matrix out(x.rows(), modes);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    for (std::size_t m = 0; m < modes; ++m) {
      const auto& trees = model.trees[m];
      if (model.kind == EnsembleKind::kRandomForest) {
        double s = 0.0;
        for (const auto& t : trees) s += t.Predict(row);
        out(r, m) = s / static_cast<double>(trees.size());
      } else {
        double f = model.base[m];
        for (const auto& t : trees) f += model.boost.shrinkage * t.Predict(row);
        out(r, m) = f;
      }
    }
  }
  return out;
}

}  // namespace dhm
