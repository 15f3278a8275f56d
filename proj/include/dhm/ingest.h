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

// CSV readers and writers for edge lists, zone maps, per-zone feature
// tables, mode-share tables and zone areas.
//
//   edges:    src,dst,weight
//   zones:    node,zone
//   features: zone,<name1>,...      (empty cell = missing)
//   shares:   zone,<mode1>,...,<modeM>
//   areas:    zone,area

#ifndef DHM_INGEST_H_
#define DHM_INGEST_H_

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dhm/graph.h"
#include "dhm/matrix.h"

namespace dhm {

struct FeatureTable {
  std::vector<std::string> zone_ids;
  std::vector<std::string> column_names;
  Matrix values;                      // NaN where missing
  std::vector<std::uint8_t> missing;  // row-major, same shape as values

  bool is_missing(std::size_t r, std::size_t c) const {
    return missing[r * column_names.size() + c] != 0;
  }
  std::optional<std::size_t> find_zone(const std::string& zone) const;
  std::optional<std::size_t> find_column(const std::string& name) const;
};

struct ModeShareTable {
  std::vector<std::string> zone_ids;
  std::vector<std::string> mode_names;
  Matrix shares;  // zones x modes, rows on the simplex
  std::size_t renormalized_rows = 0;

  std::optional<std::size_t> find_zone(const std::string& zone) const;
};

struct ZoneMap {
  std::unordered_map<std::string, std::string> zone_of;  // node label -> zone
  std::vector<std::string> zone_order;                   // first appearance
};

struct AreaTable {
  std::unordered_map<std::string, double> area;
  std::vector<std::string> zone_order;
};

// Tolerance for share rows that do not sum exactly to one.
inline constexpr double kShareSumTolerance = 0.02;

std::vector<EdgeRecord> ParseEdgeCsv(const std::string& path);
ZoneMap ParseZoneCsv(const std::string& path);
FeatureTable ParseFeatureCsv(const std::string& path);
// When `mode_names` is non-empty the header must name exactly those modes;
// columns are reordered to match.
ModeShareTable ParseShareCsv(const std::string& path,
                             const std::vector<std::string>& mode_names = {});
AreaTable ParseAreaCsv(const std::string& path);

// Line-oriented variants used by the file readers; `source` names the
// origin in error messages.
std::vector<EdgeRecord> ParseEdgeLines(const std::vector<std::string>& lines,
                                       const std::string& source);
FeatureTable ParseFeatureLines(const std::vector<std::string>& lines,
                               const std::string& source);
ModeShareTable ParseShareLines(const std::vector<std::string>& lines,
                               const std::string& source,
                               const std::vector<std::string>& mode_names = {});

void WriteEdgeCsv(const Graph& g, const std::string& path);
void WriteZoneCsv(const Graph& g, const TractAssignment& assignment,
                  const std::string& path);
void WriteFeatureCsv(const FeatureTable& t, const std::string& path);
void WriteShareCsv(const ModeShareTable& t, const std::string& path);
void WriteAreaCsv(const std::vector<std::string>& zones,
                  const std::vector<double>& areas, const std::string& path);

}  // namespace dhm

#endif  // DHM_INGEST_H_
