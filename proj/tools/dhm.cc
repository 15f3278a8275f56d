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


// Command-line driver. Every command reads the same flat configuration:
// `--config FILE` supplies `key = value` entries and `--some-key` flags
// override them.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "dhm/config.h"
#include "dhm/embedding.h"
#include "dhm/error.h"
#include "dhm/evaluation.h"
#include "dhm/graph.h"
#include "dhm/ingest.h"
#include "dhm/mix.h"
#include "dhm/pipeline.h"
#include "dhm/predictor.h"
#include "dhm/synth.h"
#include "dhm/text.h"
#include "dhm/topology.h"
#include "dhm/walker.h"

namespace dhm {
namespace {

const std::string& Require(const std::string& value, const char* key) {
  if (value.empty()) {
    std::string flag = key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    throw UsageError("missing --" + flag);
  }
  return value;
}

// Re-raises ingest failures with an "ingest: " prefix, keeping the type.
template <typename F>
auto Ingest(F&& fn) {
  try {
    return fn();
  } catch (const UsageError& e) {
    throw UsageError(std::string("ingest: ") + e.what());
  } catch (const DataError& e) {
    throw DataError(std::string("ingest: ") + e.what());
  }
}

void Emit(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
  } else {
    WriteFile(path, content);
  }
}

void Log(const std::string& cmd, const std::string& msg) {
  std::cerr << "[" << cmd << "] " << msg << "\n";
}

Graph LoadGraph(const std::string& path, const std::string& cmd) {
  const auto records = ParseEdgeCsv(path);
  BuildResult built = BuildGraph(records);
  if (built.self_loops || built.merged_duplicates) {
    Log(cmd, "dropped " + std::to_string(built.self_loops) + " self-loops, merged " +
                 std::to_string(built.merged_duplicates) + " duplicate edges");
  }
  return std::move(built.graph);
}

std::vector<double> AlignAreas(const AreaTable& areas, const TractAssignment& a) {
  std::vector<double> out;
  for (const auto& z : a.zones()) {
    auto it = areas.area.find(z);
    if (it == areas.area.end()) throw DataError("no area for zone " + z);
    out.push_back(it->second);
  }
  return out;
}

TractAssignment AssignLabels(const std::vector<std::string>& labels, const ZoneMap& zones) {
  std::vector<std::string> zone_of;
  zone_of.reserve(labels.size());
  for (const auto& label : labels) {
    auto it = zones.zone_of.find(label);
    if (it == zones.zone_of.end()) {
      throw DataError("node '" + label + "' has no zone assignment");
    }
    zone_of.push_back(it->second);
  }
  return TractAssignment(std::move(zone_of), zones.zone_order);
}

ZoneEmbedding LoadZoneEmbedding(const RunConfig& cfg) {
  return ToZoneEmbedding(LoadEmbeddings(Require(cfg.zone_embeddings, "zone_embeddings")));
}

std::size_t ClampClusters(int k, std::size_t zones, const std::string& cmd) {
  const auto want = static_cast<std::size_t>(k);
  if (want <= zones) return want;
  Log(cmd, "clusters=" + std::to_string(k) + " exceeds " + std::to_string(zones) +
               " zones; using " + std::to_string(zones));
  return zones;
}

int CmdSimplify(const RunConfig& cfg) {
  const Graph g = LoadGraph(Require(cfg.edges, "edges"), "simplify");
  SimplifyResult s = SimplifyTopology(g);
  Graph out = std::move(s.graph);
  if (cfg.pipeline.prune_rounds > 0) out = PruneDeadEnds(out, cfg.pipeline.prune_rounds);
  WriteEdgeCsv(out, Require(cfg.out, "out"));
  std::cout << s.summary.ToText();
  return 0;
}

int CmdMetrics(const RunConfig& cfg) {
  const Graph g = LoadGraph(Require(cfg.edges, "edges"), "metrics");
  const ZoneMap zones = ParseZoneCsv(Require(cfg.zones, "zones"));
  const TractAssignment a = AssignZones(g, zones.zone_of, zones.zone_order);
  const AreaTable areas = ParseAreaCsv(Require(cfg.areas, "areas"));
  Emit(cfg.out, MetricsCsv(ComputeNetworkMetrics(g, a, AlignAreas(areas, a))));
  return 0;
}

int CmdEmbed(const RunConfig& cfg) {
  const Graph g = LoadGraph(Require(cfg.edges, "edges"), "embed");
  const std::string& out = Require(cfg.out, "out");
  const WalkCorpus corpus = GenerateWalks(g, cfg.pipeline.walk);
  Log("embed", std::to_string(corpus.walks.size()) + " walks over " +
                   std::to_string(g.node_count()) + " nodes");
  const TrainResult r = Train(corpus, cfg.pipeline.train, g, cfg.pipeline.walk);
  if (!r.epoch_loss.empty()) {
    Log("embed", "final epoch loss " + FormatShort(r.epoch_loss.back()));
  }
  LabeledMatrix m;
  m.labels = g.labels();
  m.values = r.embedding.rows;
  m.seed = cfg.pipeline.train.seed;
  m.config_hash = ConfigHash(cfg.pipeline.train, cfg.pipeline.walk);
  SaveEmbeddings(m, out);
  return 0;
}

int CmdReadout(const RunConfig& cfg) {
  const LabeledMatrix nodes = LoadEmbeddings(Require(cfg.embeddings, "embeddings"));
  const ZoneMap zones = ParseZoneCsv(Require(cfg.zones, "zones"));
  const ZoneEmbedding z = Readout(nodes.values, AssignLabels(nodes.labels, zones));
  LabeledMatrix out = ToLabeled(z);
  out.seed = nodes.seed;
  out.config_hash = nodes.config_hash;
  SaveEmbeddings(out, Require(cfg.out, "out"));
  return 0;
}

PredictorParams SingleParams(const RunConfig& cfg) {
  PredictorParams p;
  p.kind = cfg.predictor;
  p.mnl = cfg.pipeline.mnl;
  p.forest.seed = cfg.pipeline.tree_seed;
  return p;
}

int CmdFit(const RunConfig& cfg) {
  const FeatureTable features = ParseFeatureCsv(Require(cfg.features, "features"));
  const ModeShareTable shares = ParseShareCsv(Require(cfg.shares, "shares"));
  ZoneEmbedding emb;
  if (cfg.input_mode != InputMode::kBaseline) emb = LoadZoneEmbedding(cfg);
  const MixedInput input = Mix(features, emb, cfg.input_mode);
  const Matrix y = AlignShares(shares, input.zone_ids);
  const TrainTestSplit split = SplitIndices(input.zone_ids.size(), cfg.pipeline.split);
  const FittedPredictor model =
      FitPredictor(input, y, shares.mode_names, split.train, SingleParams(cfg));
  SaveModel(model, Require(cfg.model, "model"));

  const Matrix pred = model.Predict(input.design);
  std::cout << "travel_mode,isr2,osr2\n";
  for (std::size_t m = 0; m < shares.mode_names.size(); ++m) {
    std::vector<double> yt, ft, ys, fs;
    for (std::size_t r : split.train) {
      yt.push_back(y(r, m));
      ft.push_back(pred(r, m));
    }
    for (std::size_t r : split.test) {
      ys.push_back(y(r, m));
      fs.push_back(pred(r, m));
    }
    std::cout << shares.mode_names[m] << ',' << FormatShort(RSquared(yt, ft)) << ','
              << FormatShort(RSquared(ys, fs)) << '\n';
  }
  return 0;
}

int CmdEvaluate(const RunConfig& cfg) {
  const FeatureTable features = ParseFeatureCsv(Require(cfg.features, "features"));
  const ModeShareTable shares = ParseShareCsv(Require(cfg.shares, "shares"));
  bool need_emb = false;
  for (InputMode m : cfg.pipeline.input_modes) need_emb |= m != InputMode::kBaseline;
  ZoneEmbedding emb;
  if (need_emb) emb = LoadZoneEmbedding(cfg);
  EvaluationReport report;
  report.split_seed = cfg.pipeline.split.seed;
  for (PredictorKind kind : cfg.pipeline.predictors) {
    const auto grid = DefaultGrid(kind, cfg.pipeline.tree_seed, cfg.pipeline.mnl);
    for (InputMode mode : cfg.pipeline.input_modes) {
      auto cells = Evaluate(kind, mode, features, emb, shares, cfg.pipeline.split, grid);
      report.cells.insert(report.cells.end(), cells.begin(), cells.end());
    }
  }
  Emit(cfg.out, ReportCsv(report));
  return 0;
}

int CmdCorrelate(const RunConfig& cfg) {
  const FeatureTable features = ParseFeatureCsv(Require(cfg.features, "features"));
  const ModeShareTable shares = ParseShareCsv(Require(cfg.shares, "shares"));
  ZoneEmbedding emb;
  const bool with_emb = !cfg.zone_embeddings.empty();
  if (with_emb) emb = LoadZoneEmbedding(cfg);
  const CorrelationMatrix corr = CorrelateTables(features, shares, with_emb ? &emb : nullptr);
  Emit(cfg.out, CorrelationCsv(corr));
  const auto kept = SelectFeatures(corr, shares.mode_names, cfg.feature_threshold);
  Log("correlate", std::to_string(kept.size()) + " variables pass |r| >= " +
                       FormatShort(cfg.feature_threshold));
  for (const auto& name : kept) std::cerr << "  " << name << "\n";
  return 0;
}

int CmdCluster(const RunConfig& cfg) {
  const ZoneEmbedding z = LoadZoneEmbedding(cfg);
  const std::size_t k = ClampClusters(cfg.clusters, z.zone_ids.size(), "cluster");
  const KMeansResult km = KMeans(z.matrix, k, StageSeed(cfg.seed, "cluster"));
  Log("cluster", "wcss " + FormatShort(km.wcss()) + " after " +
                     std::to_string(km.iterations) + " iterations");
  Emit(cfg.out, ClusterCsv(z.zone_ids, km.labels));
  return 0;
}

int CmdQuantiles(const RunConfig& cfg) {
  const ZoneEmbedding z = LoadZoneEmbedding(cfg);
  Emit(cfg.out, QuantileCsv(QuantileZones(z.embd_readout, z.zone_ids, cfg.quantiles)));
  return 0;
}

int CmdSynth(const RunConfig& cfg) {
  const SynthDataset data = GenerateCity(cfg.synth);
  WriteDataset(data, Require(cfg.out_dir, "out_dir"));
  Log("synth", std::to_string(data.graph.node_count()) + " nodes, " +
                   std::to_string(data.graph.edge_count()) + " edges, " +
                   std::to_string(data.assignment.zone_count()) + " zones");
  return 0;
}

int CmdPipeline(const RunConfig& cfg) {
  const std::filesystem::path dir(Require(cfg.out_dir, "out_dir"));
  const Graph raw = Ingest([&] { return LoadGraph(Require(cfg.edges, "edges"), "pipeline"); });
  const ZoneMap zones = Ingest([&] { return ParseZoneCsv(Require(cfg.zones, "zones")); });
  const FeatureTable features =
      Ingest([&] { return ParseFeatureCsv(Require(cfg.features, "features")); });
  const ModeShareTable shares =
      Ingest([&] { return ParseShareCsv(Require(cfg.shares, "shares")); });
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());

  Log("pipeline", std::to_string(raw.node_count()) + " nodes, " +
                      std::to_string(raw.edge_count()) + " edges");
  const PipelineResult res = RunPipeline(raw, zones, features, shares, cfg.pipeline);
  const auto path = [&dir](const char* name) { return (dir / name).string(); };

  WriteFile(path("report.csv"), ReportCsv(res.report));
  WriteFile(path("comparison.csv"), DeltaCsv(CompareInputs(res.report)));
  WriteFile(path("simplify.txt"), res.simplify.ToText());
  SaveEmbeddings(res.node_embedding, path("node_embeddings.txt"));
  LabeledMatrix zl = ToLabeled(res.zone_embedding);
  zl.seed = res.node_embedding.seed;
  zl.config_hash = res.node_embedding.config_hash;
  SaveEmbeddings(zl, path("zone_embeddings.txt"));

  const FeatureTable f = FilterZones(features, res.zone_embedding.zone_ids);
  const ModeShareTable s = FilterZones(shares, res.zone_embedding.zone_ids);
  const CorrelationMatrix corr = CorrelateTables(f, s, &res.zone_embedding);
  WriteFile(path("correlation.csv"), CorrelationCsv(corr));
  std::string selected;
  for (const auto& name : SelectFeatures(corr, s.mode_names, cfg.feature_threshold)) {
    selected += name + "\n";
  }
  WriteFile(path("selected_features.txt"), selected);

  const std::size_t k =
      ClampClusters(cfg.clusters, res.zone_embedding.zone_ids.size(), "pipeline");
  const KMeansResult km = KMeans(res.zone_embedding.matrix, k, StageSeed(cfg.seed, "cluster"));
  WriteFile(path("clusters.csv"), ClusterCsv(res.zone_embedding.zone_ids, km.labels));
  WriteFile(path("quantiles.csv"),
            QuantileCsv(QuantileZones(res.zone_embedding.embd_readout,
                                      res.zone_embedding.zone_ids, cfg.quantiles)));

  if (!cfg.areas.empty() && std::filesystem::exists(cfg.areas)) {
    const AreaTable areas = ParseAreaCsv(cfg.areas);
    WriteFile(path("metrics.csv"),
              MetricsCsv(ComputeNetworkMetrics(res.graph, res.assignment,
                                               AlignAreas(areas, res.assignment))));
  }

  std::string manifest = "# run manifest\nversion = " + std::string(kVersion) +
                         "\nschema = " + SchemaHash() + "\n";
  manifest += "\n# configuration\n" + cfg.ToText();
  manifest += "\n# stage seeds\n";
  manifest += "walk_seed = " + std::to_string(cfg.pipeline.walk.seed) + "\n";
  manifest += "train_seed = " + std::to_string(cfg.pipeline.train.seed) + "\n";
  manifest += "split_seed = " + std::to_string(cfg.pipeline.split.seed) + "\n";
  manifest += "tree_seed = " + std::to_string(cfg.pipeline.tree_seed) + "\n";
  manifest += "cluster_seed = " + std::to_string(StageSeed(cfg.seed, "cluster")) + "\n";
  manifest += "clusters_used = " + std::to_string(k) + "\n";
  manifest += "\n# simplification\n" + res.simplify.ToText();
  std::string dropped;
  for (const auto& z : res.dropped_zones) dropped += (dropped.empty() ? "" : ",") + z;
  manifest += "dropped_zones = " + dropped + "\n";
  manifest += "\n# wall clock (s)\n";
  for (const auto& [stage, sec] : res.stage_seconds) {
    manifest += stage + " = " + FormatShort(sec) + "\n";
  }
  WriteFile(path("manifest.txt"), manifest);
  Log("pipeline", "wrote " + std::to_string(res.report.cells.size()) + " report cells to " +
                      dir.string());
  return 0;
}

struct Command {
  const char* name;
  const char* help;
  int (*run)(const RunConfig&);
};

constexpr Command kCommands[] = {
    {"simplify", "contract degree-2 chains and write the simplified edge CSV", CmdSimplify},
    {"metrics", "per-zone network metrics", CmdMetrics},
    {"embed", "biased random walks and skip-gram node embeddings", CmdEmbed},
    {"readout", "mean-pool node embeddings into zone embeddings", CmdReadout},
    {"fit", "fit one predictor on the training split and save it", CmdFit},
    {"evaluate", "ISR2/OSR2 report over predictors and input modes", CmdEvaluate},
    {"correlate", "Pearson correlation matrix and feature screening", CmdCorrelate},
    {"cluster", "k-means over zone embeddings", CmdCluster},
    {"quantiles", "zones at readout quantiles", CmdQuantiles},
    {"synth", "generate a synthetic city dataset", CmdSynth},
    {"pipeline", "simplify, embed, read out, evaluate and analyse", CmdPipeline},
};

int Main(int argc, char** argv) {
  CLI::App app{"Road-network embeddings for zone-level travel mode share prediction", "dhm"};
  app.set_version_flag("--version", std::string("dhm ") + kVersion + " (config schema " +
                                        SchemaHash() + ")");
  app.require_subcommand(1);

  struct Bound {
    CLI::App* app;
    const Command* cmd;
    std::string config;
    std::map<std::string, std::pair<CLI::Option*, std::string>> flags;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const Command& c : kCommands) {
    auto b = std::make_unique<Bound>();
    b->cmd = &c;
    b->app = app.add_subcommand(c.name, c.help);
    b->app->add_option("--config", b->config, "configuration file (key = value)");
    for (const ConfigKey& key : ConfigKeys()) {
      std::string flag = "--" + key.name;
      std::replace(flag.begin(), flag.end(), '_', '-');
      auto& slot = b->flags[key.name];
      slot.first = b->app->add_option(flag, slot.second, key.help);
    }
    bound.push_back(std::move(b));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  for (const auto& b : bound) {
    if (!b->app->parsed()) continue;
    const std::string name = b->cmd->name;
    try {
      RunConfig cfg;
      if (!b->config.empty()) cfg.Load(b->config);
      for (const ConfigKey& key : ConfigKeys()) {
        const auto& [opt, value] = b->flags.at(key.name);
        if (opt->count() > 0) cfg.Set(key.name, value);
      }
      cfg.Finalize();
      return b->cmd->run(cfg);
    } catch (const UsageError& e) {
      std::cerr << "dhm " << name << ": usage error: " << e.what() << "\n";
      return 1;
    } catch (const DataError& e) {
      std::cerr << "dhm " << name << ": data error: " << e.what() << "\n";
      return 2;
    } catch (const NumericalError& e) {
      std::cerr << "dhm " << name << ": numerical error: " << e.what() << "\n";
      return 3;
    }
  }
  return 1;
}

}  // namespace
}  // namespace dhm

int main(int argc, char** argv) { return dhm::Main(argc, argv); }
