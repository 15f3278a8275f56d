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

// A behavioral predictor bundled with the standardization it was fitted
// with, plus its text serialization.

#ifndef DHM_PREDICTOR_H_
#define DHM_PREDICTOR_H_

#include <span>
#include <string>
#include <vector>

#include "dhm/mix.h"
#include "dhm/mnl.h"
#include "dhm/trees.h"

namespace dhm {

enum class PredictorKind { kMnl, kRandomForest, kGradientBoost };

PredictorKind ParsePredictorKind(const std::string& name);
std::string ToString(PredictorKind kind);

// Hyperparameters for one grid cell. Only the fields of `kind` are used.
struct PredictorParams {
  PredictorKind kind = PredictorKind::kMnl;
  MnlFitOptions mnl;
  ForestParams forest;
  BoostParams boost;

  // e.g. "n_trees=100;max_depth=4"
  std::string Describe() const;
};

struct FittedPredictor {
  PredictorKind kind = PredictorKind::kMnl;
  InputMode input_mode = InputMode::kBaseline;
  std::vector<std::string> mode_names;
  std::vector<std::string> input_columns;  // design columns before scaling
  Standardizer standardizer;
  MnlModel mnl;
  TreeEnsembleModel ensemble;
  std::string params;

  // Rows x modes predictions for a raw design (same columns as training).
  Matrix Predict(const Matrix& design) const;
};

// Fits on `train_rows` of the design; standardization statistics come from
// those rows only. `shares` is aligned with input.zone_ids.
FittedPredictor FitPredictor(const MixedInput& input, const Matrix& shares,
                             const std::vector<std::string>& mode_names,
                             std::span<const std::size_t> train_rows,
                             const PredictorParams& params);

void SaveModel(const FittedPredictor& model, const std::string& path);
FittedPredictor LoadModel(const std::string& path);

// Text form used by SaveModel/LoadModel.
std::string SerializeModel(const FittedPredictor& model);
FittedPredictor DeserializeModel(const std::string& text);

}  // namespace dhm

#endif  // DHM_PREDICTOR_H_
