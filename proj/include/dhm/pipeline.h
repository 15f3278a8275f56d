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

// End-to-end run: simplify -> walks -> skip-gram -> readout -> evaluation.

#ifndef DHM_PIPELINE_H_
#define DHM_PIPELINE_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dhm/embedding.h"
#include "dhm/evaluation.h"
#include "dhm/graph.h"
#include "dhm/ingest.h"
#include "dhm/topology.h"
#include "dhm/walker.h"

namespace dhm {

struct PipelineConfig {
  WalkConfig walk;
  TrainConfig train;
  SplitSpec split;
  bool simplify = true;
  int prune_rounds = 0;
  MnlFitOptions mnl;
  std::uint64_t tree_seed = 1;
  std::vector<PredictorKind> predictors = {PredictorKind::kMnl,
                                           PredictorKind::kRandomForest,
                                           PredictorKind::kGradientBoost};
  std::vector<InputMode> input_modes = {InputMode::kBaseline, InputMode::kGer,
                                        InputMode::kConcat};
};

struct PipelineResult {
  SimplifySummary simplify;
  Graph graph;  // after simplification and pruning
  TractAssignment assignment;
  std::vector<double> epoch_loss;
  LabeledMatrix node_embedding;
  ZoneEmbedding zone_embedding;
  EvaluationReport report;
  std::vector<std::string> dropped_zones;  // lost nodes or a table row
  std::vector<std::pair<std::string, double>> stage_seconds;
};

PipelineResult RunPipeline(const Graph& raw, const ZoneMap& zones,
                           const FeatureTable& features,
                           const ModeShareTable& shares,
                           const PipelineConfig& cfg);

// Restricts tables to the given zones, in table order.
FeatureTable FilterZones(const FeatureTable& t, const std::vector<std::string>& zones);
ModeShareTable FilterZones(const ModeShareTable& t,
                           const std::vector<std::string>& zones);
ZoneEmbedding FilterZones(const ZoneEmbedding& t, const std::vector<std::string>& zones);

}  // namespace dhm

#endif  // DHM_PIPELINE_H_
