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

#include "dhm/pipeline.h"

#include <algorithm>
#include <chrono>
#include <set>

#include "dhm/error.h"

namespace dhm {
namespace {

class StageTimer {
 public:
  explicit StageTimer(std::vector<std::pair<std::string, double>>& out) : out_(out) {}

  void Mark(const std::string& stage) {
    const auto now = std::chrono::steady_clock::now();
    out_.emplace_back(stage, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  std::vector<std::pair<std::string, double>>& out_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

// Runs `fn`, re-raising errors with the stage name in front.
template <typename F>
auto Stage(const char* name, F&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    throw UsageError(std::string(name) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string(name) + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(name) + ": " + e.what());
  }
}

}  // namespace

FeatureTable FilterZones(const FeatureTable& t, const std::vector<std::string>& zones) {
  const std::set<std::string> keep(zones.begin(), zones.end());
  FeatureTable out;
  out.column_names = t.column_names;
  std::vector<double> values;
  const std::size_t k = t.column_names.size();
  for (std::size_t r = 0; r < t.zone_ids.size(); ++r) {
    if (!keep.count(t.zone_ids[r])) continue;
    out.zone_ids.push_back(t.zone_ids[r]);
    for (std::size_t c = 0; c < k; ++c) {
      values.push_back(t.values(r, c));
      out.missing.push_back(t.missing[r * k + c]);
    }
  }
  out.values = Matrix(out.zone_ids.size(), k);
  out.values.data() = std::move(values);
  return out;
}

ModeShareTable FilterZones(const ModeShareTable& t,
                           const std::vector<std::string>& zones) {
  const std::set<std::string> keep(zones.begin(), zones.end());
  ModeShareTable out;
  out.mode_names = t.mode_names;
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < t.zone_ids.size(); ++r) {
    if (!keep.count(t.zone_ids[r])) continue;
    out.zone_ids.push_back(t.zone_ids[r]);
    rows.push_back(r);
  }
  out.shares = SelectRows(t.shares, rows);
  return out;
}

ZoneEmbedding FilterZones(const ZoneEmbedding& t,
                          const std::vector<std::string>& zones) {
  const std::set<std::string> keep(zones.begin(), zones.end());
  ZoneEmbedding out;
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < t.zone_ids.size(); ++r) {
    if (!keep.count(t.zone_ids[r])) continue;
    out.zone_ids.push_back(t.zone_ids[r]);
    out.embd_readout.push_back(t.embd_readout[r]);
    rows.push_back(r);
  }
  out.matrix = SelectRows(t.matrix, rows);
  return out;
}

PipelineResult RunPipeline(const Graph& raw, const ZoneMap& zones,
                           const FeatureTable& features,
                           const ModeShareTable& shares,
                           const PipelineConfig& cfg) {
  PipelineResult res;
  StageTimer timer(res.stage_seconds);

  Stage("simplify", [&] {
    if (cfg.simplify) {
      SimplifyResult s = SimplifyTopology(raw);
      res.graph = std::move(s.graph);
      res.simplify = s.summary;
    } else {
      res.graph = raw;
      res.simplify.nodes_before = res.simplify.nodes_after = raw.node_count();
      res.simplify.edges_before = res.simplify.edges_after = raw.edge_count();
      res.simplify.length_before = res.simplify.length_after = raw.total_length();
    }
    if (cfg.prune_rounds > 0) res.graph = PruneDeadEnds(res.graph, cfg.prune_rounds);
    if (res.graph.node_count() == 0) throw DataError("graph is empty");
    res.assignment = AssignZones(res.graph, zones.zone_of, zones.zone_order);
  });
  timer.Mark("simplify");

  const WalkCorpus corpus = Stage("walks", [&] { return GenerateWalks(res.graph, cfg.walk); });
  timer.Mark("walks");

  TrainResult trained =
      Stage("train", [&] { return Train(corpus, cfg.train, res.graph, cfg.walk); });
  res.epoch_loss = trained.epoch_loss;
  res.node_embedding.labels = res.graph.labels();
  res.node_embedding.values = trained.embedding.rows;
  res.node_embedding.seed = cfg.train.seed;
  res.node_embedding.config_hash = ConfigHash(cfg.train, cfg.walk);
  timer.Mark("train");

  const ZoneEmbedding full =
      Stage("readout", [&] { return Readout(trained.embedding.rows, res.assignment); });
  timer.Mark("readout");

  // Zones present in all three sources, in feature-table order.
  const std::set<std::string> in_emb(full.zone_ids.begin(), full.zone_ids.end());
  const std::set<std::string> in_shares(shares.zone_ids.begin(), shares.zone_ids.end());
  std::vector<std::string> common;
  for (const auto& z : features.zone_ids) {
    if (in_emb.count(z) && in_shares.count(z)) {
      common.push_back(z);
    } else {
      res.dropped_zones.push_back(z);
    }
  }
  for (const auto& z : zones.zone_order) {
    if (!in_emb.count(z)) res.dropped_zones.push_back(z);
  }
  std::sort(res.dropped_zones.begin(), res.dropped_zones.end());
  res.dropped_zones.erase(std::unique(res.dropped_zones.begin(), res.dropped_zones.end()),
                          res.dropped_zones.end());
  if (common.size() < 4) {
    throw DataError("evaluate: only " + std::to_string(common.size()) +
                    " zones have features, shares and road nodes");
  }
  const FeatureTable f = FilterZones(features, common);
  const ModeShareTable s = FilterZones(shares, common);
  res.zone_embedding = FilterZones(full, common);

  res.report.split_seed = cfg.split.seed;
  for (PredictorKind kind : cfg.predictors) {
    const auto grid = DefaultGrid(kind, cfg.tree_seed, cfg.mnl);
    for (InputMode mode : cfg.input_modes) {
      auto cells = Stage("evaluate", [&] {
        return Evaluate(kind, mode, f, res.zone_embedding, s, cfg.split, grid);
      });
      res.report.cells.insert(res.report.cells.end(), cells.begin(), cells.end());
    }
  }
  timer.Mark("evaluate");
  return res;
}

}  // namespace dhm
