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

#include "dhm/ingest.h"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "dhm/error.h"
#include "dhm/text.h"

namespace dhm {
namespace {

std::string Where(const std::string& source, std::size_t line) {
  return source + ":" + std::to_string(line) + ": ";
}

bool IsBlank(const std::string& line) { return Trim(line).empty(); }

// Returns the index of the first non-blank line, or lines.size().
std::size_t HeaderIndex(const std::vector<std::string>& lines) {
  std::size_t i = 0;
  while (i < lines.size() && IsBlank(lines[i])) ++i;
  return i;
}

std::vector<std::string> ExpectHeader(const std::vector<std::string>& lines,
                                      std::size_t idx,
                                      const std::string& source,
                                      const std::vector<std::string>& prefix,
                                      bool exact) {
  if (idx >= lines.size()) {
    throw DataError(source + ": missing header");
  }
  auto cols = Split(lines[idx], ',');
  bool ok = cols.size() >= prefix.size() && (!exact || cols.size() == prefix.size());
  for (std::size_t i = 0; ok && i < prefix.size(); ++i) ok = cols[i] == prefix[i];
  if (!ok) {
    std::string want;
    for (std::size_t i = 0; i < prefix.size(); ++i) {
      want += (i ? "," : "") + prefix[i];
    }
    throw DataError(Where(source, idx + 1) + "expected header '" + want +
                    (exact ? "'" : ",...'"));
  }
  return cols;
}

}  // namespace

std::optional<std::size_t> FeatureTable::find_zone(
    const std::string& zone) const {
  for (std::size_t i = 0; i < zone_ids.size(); ++i) {
    if (zone_ids[i] == zone) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> FeatureTable::find_column(
    const std::string& name) const {
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    if (column_names[i] == name) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> ModeShareTable::find_zone(
    const std::string& zone) const {
  for (std::size_t i = 0; i < zone_ids.size(); ++i) {
    if (zone_ids[i] == zone) return i;
  }
  return std::nullopt;
}

std::vector<EdgeRecord> ParseEdgeLines(const std::vector<std::string>& lines,
                                       const std::string& source) {
  const std::size_t h = HeaderIndex(lines);
  ExpectHeader(lines, h, source, {"src", "dst", "weight"}, true);
  std::vector<EdgeRecord> out;
  for (std::size_t i = h + 1; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    auto cols = Split(lines[i], ',');
    if (cols.size() != 3 || cols[0].empty() || cols[1].empty()) {
      throw DataError(Where(source, i + 1) + "expected 3 fields src,dst,weight");
    }
    auto w = ParseDouble(cols[2]);
    if (!w) {
      throw DataError(Where(source, i + 1) + "weight '" + cols[2] +
                      "' is not a number");
    }
    out.push_back({cols[0], cols[1], *w, i + 1});
  }
  return out;
}

std::vector<EdgeRecord> ParseEdgeCsv(const std::string& path) {
  return ParseEdgeLines(ReadLines(path), path);
}

ZoneMap ParseZoneCsv(const std::string& path) {
  const auto lines = ReadLines(path);
  const std::size_t h = HeaderIndex(lines);
  ExpectHeader(lines, h, path, {"node", "zone"}, true);
  ZoneMap out;
  std::set<std::string> seen_zones;
  for (std::size_t i = h + 1; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    auto cols = Split(lines[i], ',');
    if (cols.size() != 2 || cols[0].empty() || cols[1].empty()) {
      throw DataError(Where(path, i + 1) + "expected 2 fields node,zone");
    }
    auto [it, inserted] = out.zone_of.emplace(cols[0], cols[1]);
    if (!inserted && it->second != cols[1]) {
      throw DataError(Where(path, i + 1) + "node '" + cols[0] +
                      "' assigned to two zones");
    }
    if (seen_zones.insert(cols[1]).second) out.zone_order.push_back(cols[1]);
  }
  return out;
}

FeatureTable ParseFeatureLines(const std::vector<std::string>& lines,
                               const std::string& source) {
  const std::size_t h = HeaderIndex(lines);
  auto header = ExpectHeader(lines, h, source, {"zone"}, false);
  FeatureTable t;
  t.column_names.assign(header.begin() + 1, header.end());
  std::set<std::string> names;
  for (const auto& name : t.column_names) {
    if (name.empty() || !names.insert(name).second) {
      throw DataError(Where(source, h + 1) + "empty or duplicate column name '" +
                      name + "'");
    }
  }
  const std::size_t k = t.column_names.size();
  std::vector<double> values;
  std::set<std::string> zones;
  for (std::size_t i = h + 1; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    auto cols = Split(lines[i], ',');
    if (cols.size() != k + 1 || cols[0].empty()) {
      throw DataError(Where(source, i + 1) + "expected " + std::to_string(k + 1) +
                      " fields");
    }
    if (!zones.insert(cols[0]).second) {
      throw DataError(Where(source, i + 1) + "duplicate zone id '" + cols[0] + "'");
    }
    t.zone_ids.push_back(cols[0]);
    for (std::size_t c = 0; c < k; ++c) {
      if (cols[c + 1].empty()) {
        values.push_back(std::numeric_limits<double>::quiet_NaN());
        t.missing.push_back(1);
        continue;
      }
      auto v = ParseDouble(cols[c + 1]);
      if (!v || !std::isfinite(*v)) {
        throw DataError(Where(source, i + 1) + "column '" + t.column_names[c] +
                        "': value '" + cols[c + 1] + "' is not a finite number");
      }
      values.push_back(*v);
      t.missing.push_back(0);
    }
  }
  t.values = Matrix(t.zone_ids.size(), k);
  t.values.data() = std::move(values);
  return t;
}

FeatureTable ParseFeatureCsv(const std::string& path) {
  return ParseFeatureLines(ReadLines(path), path);
}

ModeShareTable ParseShareLines(const std::vector<std::string>& lines,
                               const std::string& source,
                               const std::vector<std::string>& mode_names) {
  const std::size_t h = HeaderIndex(lines);
  auto header = ExpectHeader(lines, h, source, {"zone"}, false);
  std::vector<std::string> file_modes(header.begin() + 1, header.end());
  if (file_modes.size() < 2) {
    throw DataError(Where(source, h + 1) + "need at least two modes");
  }
  std::set<std::string> unique(file_modes.begin(), file_modes.end());
  if (unique.size() != file_modes.size() || unique.count("")) {
    throw DataError(Where(source, h + 1) + "empty or duplicate mode name");
  }

  // column_of[m] = file column for output mode m
  ModeShareTable t;
  std::vector<std::size_t> column_of;
  if (mode_names.empty()) {
    t.mode_names = file_modes;
    for (std::size_t m = 0; m < file_modes.size(); ++m) column_of.push_back(m);
  } else {
    if (mode_names.size() != file_modes.size()) {
      throw DataError(source + ": expected " + std::to_string(mode_names.size()) +
                      " mode columns");
    }
    t.mode_names = mode_names;
    for (const auto& name : mode_names) {
      std::size_t found = file_modes.size();
      for (std::size_t c = 0; c < file_modes.size(); ++c) {
        if (file_modes[c] == name) found = c;
      }
      if (found == file_modes.size()) {
        throw DataError(source + ": mode '" + name + "' missing from header");
      }
      column_of.push_back(found);
    }
  }

  const std::size_t m = t.mode_names.size();
  std::vector<double> values;
  std::set<std::string> zones;
  for (std::size_t i = h + 1; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    auto cols = Split(lines[i], ',');
    if (cols.size() != m + 1 || cols[0].empty()) {
      throw DataError(Where(source, i + 1) + "expected " + std::to_string(m + 1) +
                      " fields");
    }
    if (!zones.insert(cols[0]).second) {
      throw DataError(Where(source, i + 1) + "duplicate zone id '" + cols[0] + "'");
    }
    std::vector<double> row(m);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const std::string& cell = cols[column_of[j] + 1];
      auto v = ParseDouble(cell);
      if (!v || !std::isfinite(*v)) {
        throw DataError(Where(source, i + 1) + "share '" + cell +
                        "' is not a finite number");
      }
      if (*v < 0.0 || *v > 1.0) {
        throw DataError(Where(source, i + 1) + "share " + cell +
                        " outside [0,1]");
      }
      row[j] = *v;
      sum += *v;
    }
    if (std::fabs(sum - 1.0) > kShareSumTolerance) {
      throw DataError(Where(source, i + 1) + "shares sum to " + FormatShort(sum) +
                      ", outside 1 +/- " + FormatShort(kShareSumTolerance));
    }
    if (std::fabs(sum - 1.0) > 1e-12) {
      for (double& v : row) v /= sum;
      ++t.renormalized_rows;
    }
    t.zone_ids.push_back(cols[0]);
    values.insert(values.end(), row.begin(), row.end());
  }
  t.shares = Matrix(t.zone_ids.size(), m);
  t.shares.data() = std::move(values);
  return t;
}

ModeShareTable ParseShareCsv(const std::string& path,
                             const std::vector<std::string>& mode_names) {
  return ParseShareLines(ReadLines(path), path, mode_names);
}

AreaTable ParseAreaCsv(const std::string& path) {
  const auto lines = ReadLines(path);
  const std::size_t h = HeaderIndex(lines);
  ExpectHeader(lines, h, path, {"zone", "area"}, true);
  AreaTable out;
  for (std::size_t i = h + 1; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    auto cols = Split(lines[i], ',');
    if (cols.size() != 2 || cols[0].empty()) {
      throw DataError(Where(path, i + 1) + "expected 2 fields zone,area");
    }
    auto v = ParseDouble(cols[1]);
    if (!v || !std::isfinite(*v) || *v <= 0.0) {
      throw DataError(Where(path, i + 1) + "area must be a positive number");
    }
    if (!out.area.emplace(cols[0], *v).second) {
      throw DataError(Where(path, i + 1) + "duplicate zone id '" + cols[0] + "'");
    }
    out.zone_order.push_back(cols[0]);
  }
  return out;
}

void WriteEdgeCsv(const Graph& g, const std::string& path) {
  std::ostringstream os;
  os << "src,dst,weight\n";
  for (const Edge& e : g.edges()) {
    os << g.label(e.a) << ',' << g.label(e.b) << ',' << FormatShort(e.weight)
       << '\n';
  }
  WriteFile(path, os.str());
}

void WriteZoneCsv(const Graph& g, const TractAssignment& assignment,
                  const std::string& path) {
  std::ostringstream os;
  os << "node,zone\n";
  for (NodeId v = 0; v < g.node_count(); ++v) {
    os << g.label(v) << ',' << assignment.zone_of(v) << '\n';
  }
  WriteFile(path, os.str());
}

void WriteFeatureCsv(const FeatureTable& t, const std::string& path) {
  std::ostringstream os;
  os << "zone";
  for (const auto& c : t.column_names) os << ',' << c;
  os << '\n';
  for (std::size_t r = 0; r < t.zone_ids.size(); ++r) {
    os << t.zone_ids[r];
    for (std::size_t c = 0; c < t.column_names.size(); ++c) {
      os << ',';
      if (!t.is_missing(r, c)) os << FormatShort(t.values(r, c));
    }
    os << '\n';
  }
  WriteFile(path, os.str());
}

void WriteShareCsv(const ModeShareTable& t, const std::string& path) {
  std::ostringstream os;
  os << "zone";
  for (const auto& m : t.mode_names) os << ',' << m;
  os << '\n';
  for (std::size_t r = 0; r < t.zone_ids.size(); ++r) {
    os << t.zone_ids[r];
    for (std::size_t c = 0; c < t.mode_names.size(); ++c) {
      os << ',' << FormatShort(t.shares(r, c));
    }
    os << '\n';
  }
  WriteFile(path, os.str());
}

void WriteAreaCsv(const std::vector<std::string>& zones,
                  const std::vector<double>& areas, const std::string& path) {
  std::ostringstream os;
  os << "zone,area\n";
  for (std::size_t i = 0; i < zones.size(); ++i) {
    os << zones[i] << ',' << FormatShort(areas[i]) << '\n';
  }
  WriteFile(path, os.str());
}

}  // namespace dhm
