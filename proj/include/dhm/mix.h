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

// Mixing operator: builds the per-zone design matrix from baseline
// features, zone embeddings, or both side by side.

#ifndef DHM_MIX_H_
#define DHM_MIX_H_

#include <span>
#include <string>
#include <vector>

#include "dhm/embedding.h"
#include "dhm/ingest.h"
#include "dhm/matrix.h"

namespace dhm {

enum class InputMode { kBaseline, kGer, kConcat };

InputMode ParseInputMode(const std::string& name);
std::string ToString(InputMode mode);

struct MixedInput {
  InputMode mode = InputMode::kBaseline;
  std::vector<std::string> zone_ids;
  std::vector<std::string> column_names;
  Matrix design;  // NaN marks a missing baseline value
};

// baseline: feature columns in feature-table zone order.
// ger: embedding columns in embedding zone order.
// concat: [features | embedding] in feature-table zone order; the two zone
// sets must be equal (DataError listing the symmetric difference).
MixedInput Mix(const FeatureTable& features, const ZoneEmbedding& zone_emb,
               InputMode mode);

// Rows of `shares` reordered to match `zone_ids`. DataError when a zone is
// missing or the sets differ.
Matrix AlignShares(const ModeShareTable& shares,
                   const std::vector<std::string>& zone_ids);

// Z-score transform fitted on training rows. Columns with zero training
// spread are dropped; missing values become the training mean (0 after
// scaling).
struct Standardizer {
  std::vector<std::size_t> kept;
  std::vector<double> mean;   // per kept column
  std::vector<double> scale;  // per kept column
  std::vector<std::string> dropped;
  std::size_t imputed = 0;    // missing cells in the training rows

  static Standardizer Fit(const Matrix& design, std::span<const std::size_t> rows,
                          const std::vector<std::string>& column_names);

  // Returns rows.size() x kept.size(); all rows when `rows` is empty.
  Matrix Apply(const Matrix& design, std::span<const std::size_t> rows = {}) const;
};

// Copies the selected rows.
Matrix SelectRows(const Matrix& m, std::span<const std::size_t> rows);

}  // namespace dhm

#endif  // DHM_MIX_H_
