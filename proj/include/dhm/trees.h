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

// CART regression trees, random forests and squared-loss gradient boosting.
// Each travel mode is regressed independently.

#ifndef DHM_TREES_H_
#define DHM_TREES_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dhm/matrix.h"
#include "dhm/random.h"

namespace dhm {

class RegressionTree {
 public:
  struct Node {
    int feature = -1;  // -1 for a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    double value = 0.0;
    friend bool operator==(const Node&, const Node&) = default;
  };

  double Predict(std::span<const double> x) const;
  std::vector<Node>& nodes() { return nodes_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  int depth() const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<Node> nodes_;
};

struct TreeParams {
  int max_depth = -1;  // -1 = unlimited
  int min_leaf = 1;
  // Candidate features per split; 0 or >= d means all.
  int features_per_split = 0;
};

// Greedy variance-reduction CART on the listed rows (duplicates allowed,
// as in a bootstrap sample). Ties in gain go to the lowest feature index,
// then the lowest threshold. `rng` is only used for feature subsampling.
RegressionTree FitTree(const Matrix& x, std::span<const double> y,
                       std::span<const std::size_t> rows,
                       const TreeParams& params, Rng* rng);

enum class EnsembleKind { kRandomForest, kGradientBoost };

std::string ToString(EnsembleKind kind);

struct ForestParams {
  int n_trees = 100;
  int max_depth = -1;
  int min_leaf = 1;
  int features_per_split = 0;  // 0 = ceil(sqrt(d))
  std::uint64_t seed = 1;
};

struct BoostParams {
  int n_rounds = 100;
  double shrinkage = 0.1;
  int max_depth = 3;
  int min_leaf = 1;
};

struct TreeEnsembleModel {
  EnsembleKind kind = EnsembleKind::kRandomForest;
  ForestParams forest;
  BoostParams boost;
  std::vector<double> base;                         // per mode; 0 for forests
  std::vector<std::vector<RegressionTree>> trees;   // per mode

  friend bool operator==(const TreeEnsembleModel& a, const TreeEnsembleModel& b) {
    return a.kind == b.kind && a.base == b.base && a.trees == b.trees;
  }
};

// `y` is rows x modes.
TreeEnsembleModel ForestFit(const Matrix& x, const Matrix& y,
                            const ForestParams& params);

// `loss_history`, when given, receives per mode the mean squared training
// residual before round 1 and after every round.
TreeEnsembleModel BoostFit(const Matrix& x, const Matrix& y,
                           const BoostParams& params,
                           std::vector<std::vector<double>>* loss_history = nullptr);

// rows x modes predictions for either kind.
Matrix EnsemblePredict(const TreeEnsembleModel& model, const Matrix& x);

}  // namespace dhm

#endif  // DHM_TREES_H_
