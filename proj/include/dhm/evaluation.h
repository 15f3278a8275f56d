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

// Train/test evaluation of mode-share predictors and the exploratory
// analyses run on zone embeddings: correlations, feature screening,
// k-means and readout quantiles.

#ifndef DHM_EVALUATION_H_
#define DHM_EVALUATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dhm/embedding.h"
#include "dhm/ingest.h"
#include "dhm/matrix.h"
#include "dhm/mix.h"
#include "dhm/predictor.h"

namespace dhm {

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 1;

  void Validate() const;
};

struct TrainTestSplit {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Seeded shuffle of 0..n-1; the first round(n * fraction) go to train,
// clamped so both sides are non-empty.
TrainTestSplit SplitIndices(std::size_t n, const SplitSpec& spec);

// 1 - SSE / SST. NumericalError for constant y.
double RSquared(std::span<const double> y, std::span<const double> f);

struct PearsonResult {
  double r = 0.0;
  bool degenerate = false;  // a side was constant; r reported as 0
  std::size_t pairs = 0;    // after dropping NaN pairs
};

// Product-moment correlation over the pairs where both entries are
// present (NaN = missing).
PearsonResult Pearson(std::span<const double> a, std::span<const double> b);

struct CorrelationMatrix {
  std::vector<std::string> names;
  Matrix r;
  std::vector<std::uint8_t> degenerate;  // row-major flags

  std::optional<std::size_t> find(const std::string& name) const;
  double at(const std::string& a, const std::string& b) const;
};

CorrelationMatrix BuildCorrelationMatrix(
    const std::vector<std::string>& names,
    const std::vector<std::vector<double>>& columns);

// Variables: feature columns, mode shares, and embd_readout when a zone
// embedding is given. Rows follow the feature table; zones absent from
// another table contribute missing values.
CorrelationMatrix CorrelateTables(const FeatureTable& features,
                                  const ModeShareTable& shares,
                                  const ZoneEmbedding* zone_emb);

// Non-mode variables whose |r| with every mode is >= threshold, in matrix
// order. UsageError for a mode absent from the matrix.
std::vector<std::string> SelectFeatures(const CorrelationMatrix& corr,
                                        const std::vector<std::string>& modes,
                                        double threshold = 0.05);

struct KMeansResult {
  std::vector<std::size_t> labels;
  Matrix centroids;
  std::vector<double> wcss_history;  // after every Lloyd iteration
  int iterations = 0;
  bool converged = false;

  double wcss() const { return wcss_history.empty() ? 0.0 : wcss_history.back(); }
};

// k-means++ seeding then Lloyd iterations until the assignment is a fixed
// point or max_iters. An empty cluster is re-seeded with the point farthest
// from its centroid.
KMeansResult KMeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    int max_iters = 300);

struct QuantileZone {
  double quantile;
  std::string zone;
  double value;
};

inline const std::vector<double> kDefaultQuantiles = {0.05, 0.25, 0.50, 0.75, 0.95};

// Lower nearest-rank: the zone at sorted position floor(q * (N - 1)). Ties
// in value keep the input zone order.
std::vector<QuantileZone> QuantileZones(
    std::span<const double> values, const std::vector<std::string>& zone_ids,
    const std::vector<double>& quantiles = kDefaultQuantiles);

struct ReportCell {
  std::string predictor;
  std::string input_mode;
  std::string travel_mode;
  double isr2 = 0.0;
  double osr2 = 0.0;
  std::string params;
};

struct EvaluationReport {
  std::vector<ReportCell> cells;
  std::uint64_t split_seed = 0;
};

// Grid for one predictor kind. Forest: n_trees {100, 300} x max_depth
// {4, 8, none}. Boosting: rounds {100, 300} x shrinkage {0.05, 0.1} x
// max_depth {4, 8, none}. MNL: the single given option set.
std::vector<PredictorParams> DefaultGrid(PredictorKind kind, std::uint64_t seed,
                                         const MnlFitOptions& mnl = {});

// Fits each grid point on the train rows and keeps the one with the best
// mean OSR2 across modes (first wins ties). One cell per travel mode.
std::vector<ReportCell> Evaluate(PredictorKind kind, InputMode mode,
                                 const FeatureTable& features,
                                 const ZoneEmbedding& zone_emb,
                                 const ModeShareTable& shares,
                                 const SplitSpec& split,
                                 const std::vector<PredictorParams>& grid);

std::string ReportCsv(const EvaluationReport& report);
std::string CorrelationCsv(const CorrelationMatrix& corr);
std::string ClusterCsv(const std::vector<std::string>& zone_ids,
                       const std::vector<std::size_t>& labels);
std::string QuantileCsv(const std::vector<QuantileZone>& rows);

}  // namespace dhm

#endif  // DHM_EVALUATION_H_
