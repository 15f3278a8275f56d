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

#include "dhm/mix.h"

#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "dhm/error.h"

namespace dhm {
namespace {

std::string SymmetricDifference(const std::vector<std::string>& a,
                                const std::vector<std::string>& b) {
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  std::string out;
  for (const auto& z : sa) {
    if (!sb.count(z)) out += (out.empty() ? "" : " ") + z;
  }
  for (const auto& z : sb) {
    if (!sa.count(z)) out += (out.empty() ? "" : " ") + z;
  }
  return out;
}

}  // namespace

InputMode ParseInputMode(const std::string& name) {
  if (name == "baseline") return InputMode::kBaseline;
  if (name == "ger") return InputMode::kGer;
  if (name == "concat") return InputMode::kConcat;
  throw UsageError("input mode must be baseline, ger or concat, got '" + name + "'");
}

std::string ToString(InputMode mode) {
  switch (mode) {
    case InputMode::kBaseline:
      return "baseline";
    case InputMode::kGer:
      return "ger";
    case InputMode::kConcat:
      return "concat";
  }
  return "?";
}

MixedInput Mix(const FeatureTable& features, const ZoneEmbedding& zone_emb,
               InputMode mode) {
  MixedInput in;
  in.mode = mode;
  if (mode == InputMode::kBaseline) {
    in.zone_ids = features.zone_ids;
    in.column_names = features.column_names;
    in.design = features.values;
    return in;
  }
  if (mode == InputMode::kGer) {
    in.zone_ids = zone_emb.zone_ids;
    for (std::size_t k = 0; k < zone_emb.matrix.cols(); ++k) {
      in.column_names.push_back("emb" + std::to_string(k));
    }
    in.design = zone_emb.matrix;
    return in;
  }

  const std::set<std::string> fz(features.zone_ids.begin(), features.zone_ids.end());
  const std::set<std::string> ez(zone_emb.zone_ids.begin(), zone_emb.zone_ids.end());
  if (fz != ez) {
    throw DataError("feature and embedding zones differ: " +
                    SymmetricDifference(features.zone_ids, zone_emb.zone_ids));
  }
  std::unordered_map<std::string, std::size_t> emb_row;
  for (std::size_t r = 0; r < zone_emb.zone_ids.size(); ++r) {
    emb_row.emplace(zone_emb.zone_ids[r], r);
  }
  const std::size_t kx = features.column_names.size();
  const std::size_t ke = zone_emb.matrix.cols();
  in.zone_ids = features.zone_ids;
  in.column_names = features.column_names;
  for (std::size_t k = 0; k < ke; ++k) {
    in.column_names.push_back("emb" + std::to_string(k));
  }
  in.design = Matrix(in.zone_ids.size(), kx + ke);
  for (std::size_t r = 0; r < in.zone_ids.size(); ++r) {
    const auto src = zone_emb.matrix.row(emb_row.at(in.zone_ids[r]));
    for (std::size_t c = 0; c < kx; ++c) in.design(r, c) = features.values(r, c);
    for (std::size_t k = 0; k < ke; ++k) in.design(r, kx + k) = src[k];
  }
  return in;
}

Matrix AlignShares(const ModeShareTable& shares,
                   const std::vector<std::string>& zone_ids) {
  const std::set<std::string> a(zone_ids.begin(), zone_ids.end());
  const std::set<std::string> b(shares.zone_ids.begin(), shares.zone_ids.end());
  if (a != b) {
    throw DataError("input and share zones differ: " +
                    SymmetricDifference(zone_ids, shares.zone_ids));
  }
  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t r = 0; r < shares.zone_ids.size(); ++r) {
    row_of.emplace(shares.zone_ids[r], r);
  }
  Matrix out(zone_ids.size(), shares.mode_names.size());
  for (std::size_t r = 0; r < zone_ids.size(); ++r) {
    const auto src = shares.shares.row(row_of.at(zone_ids[r]));
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

Standardizer Standardizer::Fit(const Matrix& design,
                               std::span<const std::size_t> rows,
                               const std::vector<std::string>& column_names) {
  Standardizer s;
  for (std::size_t c = 0; c < design.cols(); ++c) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t r : rows) {
      const double x = design(r, c);
      if (std::isnan(x)) {
        ++s.imputed;
        continue;
      }
      sum += x;
      ++count;
    }
    if (count == 0) {
      s.dropped.push_back(column_names[c]);
      continue;
    }
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (std::size_t r : rows) {
      const double x = design(r, c);
      if (!std::isnan(x)) ss += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(ss / static_cast<double>(count));
    if (!(sd > 1e-12 * std::max(1.0, std::fabs(mean)))) {
      s.dropped.push_back(column_names[c]);
      continue;
    }
    s.kept.push_back(c);
    s.mean.push_back(mean);
    s.scale.push_back(sd);
  }
  return s;
}

Matrix Standardizer::Apply(const Matrix& design,
                           std::span<const std::size_t> rows) const {
  std::vector<std::size_t> all;
  if (rows.empty()) {
    all.resize(design.rows());
    std::iota(all.begin(), all.end(), 0);
    rows = all;
  }
  Matrix out(rows.size(), kept.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < kept.size(); ++j) {
      const double x = design(rows[i], kept[j]);
      out(i, j) = std::isnan(x) ? 0.0 : (x - mean[j]) / scale[j];
    }
  }
  return out;
}

Matrix SelectRows(const Matrix& m, std::span<const std::size_t> rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace dhm
