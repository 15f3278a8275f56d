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


// Synthetic city with a planted zone-level density signal. Zones sit on a
// square layout with dense zones gathered toward a downtown edge; dense zones
// are near-complete lattices, sparse zones are spanning trees with a few
// extra links. Mode shares depend on density, and the baseline features see
// it only through noise.

#ifndef DHM_SYNTH_H_
#define DHM_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "dhm/evaluation.h"
#include "dhm/graph.h"
#include "dhm/ingest.h"
#include "dhm/pipeline.h"
#include "dhm/text.h"

namespace dhm {

struct SynthConfig {
  int n_zones = 20;
  int nodes_per_zone = 15;
  double dense_zone_fraction = 0.5;
  // Noise on the distance-from-downtown ranking that picks dense zones, in
  // units of the city width. 0 gives a clean density gradient.
  double layout_jitter = 0.1;
  double intra_edge_prob_dense = 0.9;
  double intra_edge_prob_sparse = 0.1;
  double inter_edge_prob = 0.3;
  int n_baseline_features = 4;
  double feature_signal = 0.3;
  double share_noise_scale = 0.1;
  std::uint64_t seed = 1;

  // UsageError on a violated invariant.
  void Validate() const;
  std::string ToText() const;  // `key = value` lines
};

// Parses the keys written by ToText; unknown keys raise DataError.
SynthConfig ParseSynthConfig(const std::vector<KeyValue>& entries,
                             const std::string& source);

struct ModeCoefficients {
  std::string mode;
  double a = 0.0;
  double b = 0.0;
};

// Fixed utilities: shares = softmax(a + b * planted + noise).
const std::vector<ModeCoefficients>& SynthModes();

struct SynthDataset {
  SynthConfig config;
  int attempts = 1;  // generation attempts until the graph was connected
  Graph graph;
  TractAssignment assignment;
  FeatureTable features;
  ModeShareTable shares;
  std::vector<double> areas;          // per zone, assignment order
  std::vector<double> planted;        // per zone in [0, 1]
  std::vector<double> intra_density;  // intra-zone edges per node
  std::vector<std::uint8_t> dense;    // per zone

  ZoneMap zone_map() const;
  std::string Manifest() const;
};

// DataError if no connected graph appears within 10 attempts.
SynthDataset GenerateCity(const SynthConfig& cfg);

// Writes edges.csv, zones.csv, features.csv, shares.csv, areas.csv and
// manifest.txt into `dir` (created if needed).
void WriteDataset(const SynthDataset& data, const std::string& dir);

struct ModeDelta {
  std::string predictor;
  std::string travel_mode;
  double baseline = 0.0;
  double ger = 0.0;
  double concat = 0.0;
};

struct ExperimentResult {
  PipelineResult pipeline;
  std::vector<ModeDelta> deltas;  // per predictor and travel mode
};

ExperimentResult RunExperiment(const SynthConfig& synth, const PipelineConfig& cfg);

// predictor,travel_mode,baseline,ger,concat,ger_delta,concat_delta
std::string DeltaCsv(const std::vector<ModeDelta>& deltas);

// Per-report deltas from cells; cells for absent input modes leave NaN.
std::vector<ModeDelta> CompareInputs(const EvaluationReport& report);

}  // namespace dhm

#endif  // DHM_SYNTH_H_
